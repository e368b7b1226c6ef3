#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "nbe2e/train/param_store.hpp"

namespace nbe2e::train {

struct GradCheckOptions {
  double step = 1e-5;
  // Blocks larger than this are checked on a random subset of this size.
  int max_coords_per_block = 200;
  // Coordinates where both gradients are below this are skipped.
  double min_magnitude = 1e-8;
  std::uint64_t seed = 0;
  // Empty means every trainable block.
  std::vector<std::string> blocks;
};

struct GradCheckEntry {
  std::string block;
  double max_rel_error = 0.0;
  int coords_checked = 0;
};

struct GradCheckReport {
  std::vector<GradCheckEntry> entries;

  double max_error() const;
  bool passed(double tolerance) const { return max_error() < tolerance; }
};

using LossFn = std::function<double(const ParamStore&)>;
using GradFn = std::function<void(const ParamStore&, Gradients&)>;

// Compares grad() against central differences of loss() coordinate by
// coordinate; relative error is |a - n| / max(|a|, |n|).
GradCheckReport grad_check(ParamStore& store, const LossFn& loss, const GradFn& grad,
                           const GradCheckOptions& options = {});

}  // namespace nbe2e::train
