#include "nbe2e/signal/waveform.hpp"

#include <cmath>
#include <stdexcept>

namespace nbe2e::signal {

void MultichannelWaveform::validate() const {
  if (!(sample_rate > 0.0)) throw std::invalid_argument("sample_rate must be positive");
  if (channels.empty()) throw std::invalid_argument("waveform has no channels");
  const auto n = channels.front().size();
  for (const auto& ch : channels) {
    if (ch.size() != n) throw std::invalid_argument("channels differ in length");
    for (double v : ch) {
      if (!std::isfinite(v)) throw std::invalid_argument("non-finite sample");
    }
  }
}

}  // namespace nbe2e::signal
