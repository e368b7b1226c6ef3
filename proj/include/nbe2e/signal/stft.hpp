#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "nbe2e/linalg.hpp"
#include "nbe2e/signal/complex.hpp"
#include "nbe2e/signal/waveform.hpp"

namespace nbe2e::signal {

enum class WindowType { kHann, kHamming, kRectangular };

WindowType parse_window(const std::string& name);
std::string window_name(WindowType w);

// Periodic taper of the given length.
std::vector<double> make_window(WindowType type, int length);

struct StftConfig {
  int window_length = 400;  // 25 ms at 16 kHz
  int hop = 160;            // 10 ms
  int fft_size = 512;
  WindowType window = WindowType::kHann;

  int bins() const { return fft_size / 2 + 1; }
  // floor((len - L) / hop) + 1, or 0 when the signal is shorter than a window.
  int num_frames(std::size_t length) const;
  // hop <= L <= N, N a power of two.
  void validate() const;
};

// X_c[t, k] stored as separate real and imaginary planes, laid out
// [channel][frame][bin].
struct ComplexSpectrogram {
  int frames = 0;
  int channels = 0;
  int bins = 0;
  std::vector<double> re;
  std::vector<double> im;

  ComplexSpectrogram() = default;
  ComplexSpectrogram(int frames, int channels, int bins);

  std::size_t index(int c, int t, int k) const {
    return (static_cast<std::size_t>(c) * frames + t) * bins + k;
  }
  ComplexPair at(int c, int t, int k) const {
    const auto i = index(c, t, k);
    return {re[i], im[i]};
  }
  void set(int c, int t, int k, ComplexPair z) {
    const auto i = index(c, t, k);
    re[i] = z.re;
    im[i] = z.im;
  }
  // One channel as a complex [frames x bins] matrix.
  CMat channel_matrix(int c) const;
};

// Frame t covers samples [t*hop, t*hop + L), windowed and zero padded to N.
// Throws std::invalid_argument("insufficient samples") when the signal is
// shorter than one window.
ComplexSpectrogram stft(const MultichannelWaveform& wave, const StftConfig& cfg);

// Weighted overlap-add inverse of one channel. Debugging aid only.
std::vector<double> istft(const ComplexSpectrogram& spec, int channel, const StftConfig& cfg);

}  // namespace nbe2e::signal
