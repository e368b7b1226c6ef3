#include "nbe2e/train/optim.hpp"

#include <cmath>
#include <stdexcept>

namespace nbe2e::train {

double LrSchedule::lr_at(std::int64_t step) const {
  if (step < 1) throw std::invalid_argument("lr_at: step must be >= 1");
  if (warmup_steps < 1) throw std::invalid_argument("lr_at: warmup_steps must be >= 1");
  const double s = static_cast<double>(step);
  const double w = static_cast<double>(warmup_steps);
  const double scale = peak_lr * std::sqrt(w);
  return scale * std::min(1.0 / std::sqrt(s), s * std::pow(w, -1.5));
}

OptimizerState::OptimizerState(const ParamStore& store, AdamOptions opts) : options(opts) {
  m.resize(store.size());
  v.resize(store.size());
  for (int i = 0; i < store.size(); ++i) {
    m[i].assign(store.block(i).size(), 0.0);
    v[i].assign(store.block(i).size(), 0.0);
  }
}

void adam_step(ParamStore& store, const Gradients& grads, OptimizerState& state, double lr) {
  if (grads.size() != store.size() || static_cast<int>(state.m.size()) != store.size())
    throw std::invalid_argument("adam_step: layout mismatch");
  for (int b = 0; b < store.size(); ++b) {
    if (!store.block(b).trainable) continue;
    for (double g : grads[b])
      if (!std::isfinite(g)) throw std::runtime_error("gradient blowup in " + store.block(b).name);
  }
  ++state.step;
  const auto& o = state.options;
  const double c1 = 1.0 - std::pow(o.beta1, static_cast<double>(state.step));
  const double c2 = 1.0 - std::pow(o.beta2, static_cast<double>(state.step));
  for (int b = 0; b < store.size(); ++b) {
    if (!store.block(b).trainable) continue;
    auto p = store.value(b);
    const auto g = grads[b];
    auto& m = state.m[b];
    auto& v = state.v[b];
    for (std::size_t i = 0; i < p.size(); ++i) {
      m[i] = o.beta1 * m[i] + (1.0 - o.beta1) * g[i];
      v[i] = o.beta2 * v[i] + (1.0 - o.beta2) * g[i] * g[i];
      p[i] -= lr * (m[i] / c1) / (std::sqrt(v[i] / c2) + o.eps);
    }
  }
  store.touch();
}

double clip_global_norm(Gradients& grads, double max_norm) {
  const double norm = std::sqrt(grads.squared_norm());
  if (norm > max_norm && norm > 0.0) grads.scale(max_norm / norm);
  return norm;
}

}  // namespace nbe2e::train
