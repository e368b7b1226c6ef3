#include "nbe2e/signal/stft.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "nbe2e/signal/fft.hpp"

namespace nbe2e::signal {

WindowType parse_window(const std::string& name) {
  if (name == "hann") return WindowType::kHann;
  if (name == "hamming") return WindowType::kHamming;
  if (name == "rectangular") return WindowType::kRectangular;
  throw std::invalid_argument("unknown window '" + name + "'");
}

std::string window_name(WindowType w) {
  switch (w) {
    case WindowType::kHann: return "hann";
    case WindowType::kHamming: return "hamming";
    case WindowType::kRectangular: return "rectangular";
  }
  return "hann";
}

std::vector<double> make_window(WindowType type, int length) {
  std::vector<double> w(length, 1.0);
  const double a = 2.0 * std::numbers::pi / length;
  for (int n = 0; n < length; ++n) {
    switch (type) {
      case WindowType::kHann: w[n] = 0.5 - 0.5 * std::cos(a * n); break;
      case WindowType::kHamming: w[n] = 0.54 - 0.46 * std::cos(a * n); break;
      case WindowType::kRectangular: break;
    }
  }
  return w;
}

int StftConfig::num_frames(std::size_t length) const {
  if (length < static_cast<std::size_t>(window_length)) return 0;
  return static_cast<int>((length - window_length) / hop) + 1;
}

void StftConfig::validate() const {
  if (hop <= 0 || window_length <= 0 || fft_size <= 0)
    throw std::invalid_argument("stft sizes must be positive");
  if (hop > window_length) throw std::invalid_argument("stft hop exceeds window length");
  if (window_length > fft_size) throw std::invalid_argument("stft window length exceeds fft size");
  if ((fft_size & (fft_size - 1)) != 0) throw std::invalid_argument("stft fft size must be a power of two");
}

ComplexSpectrogram::ComplexSpectrogram(int frames, int channels, int bins)
    : frames(frames), channels(channels), bins(bins) {
  const auto n = static_cast<std::size_t>(frames) * channels * bins;
  re.assign(n, 0.0);
  im.assign(n, 0.0);
}

CMat ComplexSpectrogram::channel_matrix(int c) const {
  CMat m(frames, bins);
  for (int t = 0; t < frames; ++t)
    for (int k = 0; k < bins; ++k) {
      const auto i = index(c, t, k);
      m(t, k) = cdouble(re[i], im[i]);
    }
  return m;
}

ComplexSpectrogram stft(const MultichannelWaveform& wave, const StftConfig& cfg) {
  cfg.validate();
  wave.validate();
  const int frames = cfg.num_frames(wave.length());
  if (frames == 0) throw std::invalid_argument("insufficient samples");

  const int channels = static_cast<int>(wave.num_channels());
  ComplexSpectrogram spec(frames, channels, cfg.bins());
  const auto window = make_window(cfg.window, cfg.window_length);

  RealFft fft(cfg.fft_size);
  std::vector<double> frame(cfg.window_length);
  std::vector<std::complex<double>> bins(cfg.bins());
  for (int c = 0; c < channels; ++c) {
    const auto& x = wave.channels[c];
    for (int t = 0; t < frames; ++t) {
      const std::size_t start = static_cast<std::size_t>(t) * cfg.hop;
      for (int n = 0; n < cfg.window_length; ++n) frame[n] = x[start + n] * window[n];
      fft.forward(frame, bins);
      for (int k = 0; k < cfg.bins(); ++k) spec.set(c, t, k, {bins[k].real(), bins[k].imag()});
    }
  }
  return spec;
}

std::vector<double> istft(const ComplexSpectrogram& spec, int channel, const StftConfig& cfg) {
  cfg.validate();
  const auto window = make_window(cfg.window, cfg.window_length);
  const std::size_t len = static_cast<std::size_t>(spec.frames - 1) * cfg.hop + cfg.window_length;
  std::vector<double> out(len, 0.0), norm(len, 0.0);
  RealFft fft(cfg.fft_size);
  std::vector<std::complex<double>> bins(cfg.bins());
  std::vector<double> frame(cfg.fft_size);
  for (int t = 0; t < spec.frames; ++t) {
    for (int k = 0; k < cfg.bins(); ++k) {
      const auto z = spec.at(channel, t, k);
      bins[k] = {z.re, z.im};
    }
    fft.inverse(bins, frame);
    const std::size_t start = static_cast<std::size_t>(t) * cfg.hop;
    for (int n = 0; n < cfg.window_length; ++n) {
      out[start + n] += frame[n] * window[n];
      norm[start + n] += window[n] * window[n];
    }
  }
  for (std::size_t i = 0; i < len; ++i)
    if (norm[i] > 1e-12) out[i] /= norm[i];
  return out;
}

}  // namespace nbe2e::signal
