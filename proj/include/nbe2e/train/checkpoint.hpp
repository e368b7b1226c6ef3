#pragma once

#include <filesystem>
#include <string>

#include "nbe2e/train/optim.hpp"
#include "nbe2e/train/param_store.hpp"

namespace nbe2e::train {

// <stem>.bin holds, per block: u32 name length, name bytes, u32 rank,
// rank x u64 dims, then the values as little-endian IEEE-754 doubles.
// <stem>.idx is a text index with one "name<TAB>d0xd1..<TAB>offset<TAB>count"
// line per block (offset in bytes of the first value).
void save_params(const std::filesystem::path& dir, const std::string& stem, const ParamStore& store);

// Every block in the file must exist in the store with the same shape and
// vice versa; throws std::runtime_error otherwise.
void load_params(const std::filesystem::path& dir, const std::string& stem, ParamStore& store);

// Adam moments are written in the same format as blocks "m/<name>" and
// "v/<name>" plus a one-element "step" block.
void save_optimizer(const std::filesystem::path& dir, const std::string& stem, const ParamStore& store,
                    const OptimizerState& state);
void load_optimizer(const std::filesystem::path& dir, const std::string& stem, const ParamStore& store,
                    OptimizerState& state);

}  // namespace nbe2e::train
