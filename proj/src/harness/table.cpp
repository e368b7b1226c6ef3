#include "nbe2e/harness/table.hpp"

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace nbe2e::harness {
namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

void check_name(const std::string& s) {
  if (s.find_first_of(",\n\"") != std::string::npos)
    throw std::invalid_argument("table labels may not contain commas, quotes or newlines: " + s);
}

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), f, v);
  return buf;
}

}  // namespace

void ResultsTable::add_row(const std::string& name, std::vector<double> values) {
  if (values.size() != columns.size()) throw std::invalid_argument("row width does not match columns");
  rows.push_back(name);
  cells.push_back(std::move(values));
}

std::string ResultsTable::to_csv() const {
  std::string out = corner;
  check_name(corner);
  for (const auto& c : columns) {
    check_name(c);
    out += "," + c;
  }
  out += '\n';
  for (std::size_t r = 0; r < rows.size(); ++r) {
    check_name(rows[r]);
    out += rows[r];
    for (double v : cells[r]) out += "," + fmt("%.17g", v);
    out += '\n';
  }
  return out;
}

ResultsTable ResultsTable::parse_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  ResultsTable t;
  if (!std::getline(in, line)) throw std::runtime_error("empty table");
  auto header = split_csv_line(line);
  if (header.empty()) throw std::runtime_error("table header is empty");
  t.corner = header[0];
  t.columns.assign(header.begin() + 1, header.end());
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    auto f = split_csv_line(line);
    if (f.size() != header.size()) throw std::runtime_error("ragged table row: " + line);
    std::vector<double> v;
    for (std::size_t i = 1; i < f.size(); ++i) {
      char* end = nullptr;
      v.push_back(std::strtod(f[i].c_str(), &end));
      if (end == f[i].c_str() || *end != '\0') throw std::runtime_error("bad number in table: " + f[i]);
    }
    t.add_row(f[0], std::move(v));
  }
  return t;
}

std::string ResultsTable::to_markdown() const {
  std::vector<std::vector<std::string>> grid;
  std::vector<std::string> head{corner};
  head.insert(head.end(), columns.begin(), columns.end());
  grid.push_back(head);
  for (std::size_t r = 0; r < rows.size(); ++r) {
    std::vector<std::string> row{rows[r]};
    for (double v : cells[r]) row.push_back(fmt("%.2f", v));
    grid.push_back(row);
  }
  std::vector<std::size_t> width(head.size(), 3);
  for (const auto& row : grid)
    for (std::size_t i = 0; i < row.size(); ++i) width[i] = std::max(width[i], row[i].size());

  auto emit = [&](const std::vector<std::string>& row) {
    std::string s = "|";
    for (std::size_t i = 0; i < row.size(); ++i) {
      const auto pad = std::string(width[i] - row[i].size(), ' ');
      s += " " + (i == 0 ? row[i] + pad : pad + row[i]) + " |";
    }
    return s + "\n";
  };
  std::string out = emit(grid[0]);
  out += "|";
  for (std::size_t i = 0; i < width.size(); ++i)
    out += (i == 0 ? " :" + std::string(width[i] - 1, '-') : " " + std::string(width[i] - 1, '-') + ":") + " |";
  out += "\n";
  for (std::size_t r = 1; r < grid.size(); ++r) out += emit(grid[r]);
  return out;
}

void ResultsTable::write(const std::filesystem::path& stem) const {
  std::filesystem::create_directories(stem.parent_path());
  std::ofstream(stem.string() + ".csv") << to_csv();
  std::ofstream(stem.string() + ".md") << to_markdown();
}

}  // namespace nbe2e::harness
