#pragma once

#include <cstddef>
#include <vector>

namespace nbe2e::signal {

// Time-domain samples for C microphones sharing one sample rate.
struct MultichannelWaveform {
  double sample_rate = 16000.0;
  std::vector<std::vector<double>> channels;

  MultichannelWaveform() = default;
  MultichannelWaveform(double rate, std::size_t num_channels, std::size_t length)
      : sample_rate(rate), channels(num_channels, std::vector<double>(length, 0.0)) {}

  std::size_t num_channels() const { return channels.size(); }
  std::size_t length() const { return channels.empty() ? 0 : channels.front().size(); }

  // Throws std::invalid_argument on ragged channels, a non-positive rate or
  // non-finite samples.
  void validate() const;
};

}  // namespace nbe2e::signal
