#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace nbe2e::harness {

// Rows are systems, columns are conditions; cells hold WER in percent.
struct ResultsTable {
  std::string corner = "system";
  std::vector<std::string> columns;
  std::vector<std::string> rows;
  std::vector<std::vector<double>> cells;  // [row][column]

  void add_row(const std::string& name, std::vector<double> values);

  // Values with round-trip precision, so parse_csv(to_csv()) == *this.
  std::string to_csv() const;
  static ResultsTable parse_csv(const std::string& text);
  // Space-padded markdown with two decimals.
  std::string to_markdown() const;

  void write(const std::filesystem::path& stem) const;  // <stem>.csv and <stem>.md

  friend bool operator==(const ResultsTable&, const ResultsTable&) = default;
};

}  // namespace nbe2e::harness
