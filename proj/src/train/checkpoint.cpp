#include "nbe2e/train/checkpoint.hpp"

#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <vector>

namespace nbe2e::train {
namespace {

struct RawBlock {
  std::string name;
  std::vector<std::uint64_t> shape;
  std::vector<double> values;
};

void put_uint(std::vector<unsigned char>& out, std::uint64_t v, int bytes) {
  for (int i = 0; i < bytes; ++i) out.push_back(static_cast<unsigned char>((v >> (8 * i)) & 0xff));
}

std::uint64_t get_uint(const std::vector<unsigned char>& in, std::size_t& pos, int bytes) {
  if (pos + bytes > in.size()) throw std::runtime_error("truncated checkpoint");
  std::uint64_t v = 0;
  for (int i = 0; i < bytes; ++i) v |= static_cast<std::uint64_t>(in[pos + i]) << (8 * i);
  pos += bytes;
  return v;
}

void write_blocks(const std::filesystem::path& dir, const std::string& stem,
                  const std::vector<RawBlock>& blocks) {
  std::filesystem::create_directories(dir);
  std::vector<unsigned char> bin;
  std::ostringstream idx;
  for (const auto& b : blocks) {
    put_uint(bin, b.name.size(), 4);
    bin.insert(bin.end(), b.name.begin(), b.name.end());
    put_uint(bin, b.shape.size(), 4);
    for (auto d : b.shape) put_uint(bin, d, 8);
    const std::size_t offset = bin.size();
    for (double v : b.values) {
      std::uint64_t bits;
      std::memcpy(&bits, &v, 8);
      put_uint(bin, bits, 8);
    }
    idx << b.name << '\t';
    for (std::size_t i = 0; i < b.shape.size(); ++i) idx << (i ? "x" : "") << b.shape[i];
    idx << '\t' << offset << '\t' << b.values.size() << '\n';
  }
  std::ofstream fb(dir / (stem + ".bin"), std::ios::binary);
  std::ofstream fi(dir / (stem + ".idx"));
  if (!fb || !fi) throw std::runtime_error("cannot write checkpoint in " + dir.string());
  fb.write(reinterpret_cast<const char*>(bin.data()), static_cast<std::streamsize>(bin.size()));
  fi << idx.str();
}

std::vector<RawBlock> read_blocks(const std::filesystem::path& dir, const std::string& stem) {
  const auto path = dir / (stem + ".bin");
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot read checkpoint " + path.string());
  std::vector<unsigned char> in((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
  std::vector<RawBlock> blocks;
  std::size_t pos = 0;
  while (pos < in.size()) {
    RawBlock b;
    const auto name_len = get_uint(in, pos, 4);
    if (pos + name_len > in.size()) throw std::runtime_error("truncated checkpoint");
    b.name.assign(in.begin() + static_cast<std::ptrdiff_t>(pos),
                  in.begin() + static_cast<std::ptrdiff_t>(pos + name_len));
    pos += name_len;
    const auto rank = get_uint(in, pos, 4);
    std::uint64_t count = 1;
    for (std::uint64_t i = 0; i < rank; ++i) {
      b.shape.push_back(get_uint(in, pos, 8));
      count *= b.shape.back();
    }
    b.values.resize(count);
    for (auto& v : b.values) {
      const auto bits = get_uint(in, pos, 8);
      std::memcpy(&v, &bits, 8);
    }
    blocks.push_back(std::move(b));
  }
  return blocks;
}

std::vector<std::uint64_t> shape_of(const ParamBlock& b) {
  return {b.shape.begin(), b.shape.end()};
}

}  // namespace

void save_params(const std::filesystem::path& dir, const std::string& stem, const ParamStore& store) {
  std::vector<RawBlock> blocks;
  for (int i = 0; i < store.size(); ++i) {
    const auto& b = store.block(i);
    blocks.push_back({b.name, shape_of(b), {b.value.begin(), b.value.end()}});
  }
  write_blocks(dir, stem, blocks);
}

void load_params(const std::filesystem::path& dir, const std::string& stem, ParamStore& store) {
  const auto blocks = read_blocks(dir, stem);
  if (static_cast<int>(blocks.size()) != store.size())
    throw std::runtime_error("checkpoint/model mismatch: block count differs");
  for (const auto& raw : blocks) {
    const auto id = store.find(raw.name);
    if (!id) throw std::runtime_error("checkpoint/model mismatch: unknown block " + raw.name);
    auto& b = store.block(*id);
    if (shape_of(b) != raw.shape) throw std::runtime_error("checkpoint/model mismatch: shape of " + raw.name);
    b.value.assign(raw.values.begin(), raw.values.end());
  }
  store.touch();
}

void save_optimizer(const std::filesystem::path& dir, const std::string& stem, const ParamStore& store,
                    const OptimizerState& state) {
  std::vector<RawBlock> blocks;
  blocks.push_back({"step", {1}, {static_cast<double>(state.step)}});
  for (int i = 0; i < store.size(); ++i) {
    const auto& b = store.block(i);
    blocks.push_back({"m/" + b.name, shape_of(b), state.m[i]});
    blocks.push_back({"v/" + b.name, shape_of(b), state.v[i]});
  }
  write_blocks(dir, stem, blocks);
}

void load_optimizer(const std::filesystem::path& dir, const std::string& stem, const ParamStore& store,
                    OptimizerState& state) {
  const auto blocks = read_blocks(dir, stem);
  OptimizerState loaded(store, state.options);
  bool have_step = false;
  for (const auto& raw : blocks) {
    if (raw.name == "step") {
      loaded.step = static_cast<std::int64_t>(raw.values.at(0));
      have_step = true;
      continue;
    }
    if (raw.name.size() < 3 || raw.name[1] != '/') throw std::runtime_error("bad optimizer block " + raw.name);
    const auto id = store.find(raw.name.substr(2));
    if (!id || shape_of(store.block(*id)) != raw.shape)
      throw std::runtime_error("optimizer/model mismatch at " + raw.name);
    (raw.name[0] == 'm' ? loaded.m : loaded.v)[*id] = raw.values;
  }
  if (!have_step) throw std::runtime_error("optimizer checkpoint lacks step");
  state = std::move(loaded);
}

}  // namespace nbe2e::train
