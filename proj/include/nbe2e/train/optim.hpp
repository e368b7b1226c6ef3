#pragma once

#include <cstdint>
#include <vector>

#include "nbe2e/train/param_store.hpp"

namespace nbe2e::train {

// Warmup then inverse-square-root decay:
//   lr = scale * min(step^-0.5, step * warmup^-1.5)
// with scale chosen so the peak, reached at step == warmup, is peak_lr.
struct LrSchedule {
  double peak_lr = 1e-3;
  std::int64_t warmup_steps = 4000;

  double lr_at(std::int64_t step) const;  // step >= 1
};

struct AdamOptions {
  double beta1 = 0.9;
  double beta2 = 0.98;
  double eps = 1e-9;
};

struct OptimizerState {
  AdamOptions options;
  std::int64_t step = 0;
  std::vector<std::vector<double>> m;
  std::vector<std::vector<double>> v;

  OptimizerState() = default;
  OptimizerState(const ParamStore& store, AdamOptions options = {});
};

// One bias-corrected Adam update of every trainable block. Throws
// std::runtime_error("gradient blowup in <block>") on a non-finite gradient,
// before touching any parameter.
void adam_step(ParamStore& store, const Gradients& grads, OptimizerState& state, double lr);

// Rescales grads so their global L2 norm is at most max_norm; returns the
// norm before clipping.
double clip_global_norm(Gradients& grads, double max_norm);

}  // namespace nbe2e::train
