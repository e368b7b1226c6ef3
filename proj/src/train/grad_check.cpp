#include "nbe2e/train/grad_check.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

namespace nbe2e::train {

double GradCheckReport::max_error() const {
  double m = 0.0;
  for (const auto& e : entries) m = std::max(m, e.max_rel_error);
  return m;
}

GradCheckReport grad_check(ParamStore& store, const LossFn& loss, const GradFn& grad,
                           const GradCheckOptions& options) {
  Gradients analytic(store);
  grad(store, analytic);

  std::mt19937_64 rng(options.seed);
  GradCheckReport report;
  for (ParamId b = 0; b < store.size(); ++b) {
    const auto& blk = store.block(b);
    if (!blk.trainable) continue;
    if (!options.blocks.empty() &&
        std::find(options.blocks.begin(), options.blocks.end(), blk.name) == options.blocks.end())
      continue;

    std::vector<std::size_t> coords(blk.size());
    std::iota(coords.begin(), coords.end(), 0);
    if (coords.size() > static_cast<std::size_t>(options.max_coords_per_block)) {
      std::shuffle(coords.begin(), coords.end(), rng);
      coords.resize(options.max_coords_per_block);
      std::sort(coords.begin(), coords.end());
    }

    GradCheckEntry entry{blk.name, 0.0, 0};
    auto values = store.value(b);
    for (std::size_t i : coords) {
      const double saved = values[i];
      values[i] = saved + options.step;
      store.touch();
      const double up = loss(store);
      values[i] = saved - options.step;
      store.touch();
      const double down = loss(store);
      values[i] = saved;
      store.touch();

      const double numeric = (up - down) / (2.0 * options.step);
      const double a = analytic[b][i];
      const double scale = std::max(std::abs(a), std::abs(numeric));
      if (scale <= options.min_magnitude) continue;
      entry.max_rel_error = std::max(entry.max_rel_error, std::abs(a - numeric) / scale);
      ++entry.coords_checked;
    }
    report.entries.push_back(entry);
  }
  return report;
}

}  // namespace nbe2e::train
