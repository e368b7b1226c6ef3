#include "nbe2e/room/mix.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "nbe2e/signal/fft.hpp"

namespace nbe2e::room {
namespace {

double total_power(const signal::MultichannelWaveform& w) {
  double p = 0.0;
  for (const auto& ch : w.channels)
    for (double v : ch) p += v * v;
  return p;
}

}  // namespace

double power_ratio_db(const signal::MultichannelWaveform& a, const signal::MultichannelWaveform& b) {
  return 10.0 * std::log10(total_power(a) / total_power(b));
}

signal::MultichannelWaveform mix_scene(const signal::MultichannelWaveform& clean,
                                       const signal::MultichannelWaveform& noise,
                                       const std::vector<std::vector<double>>& rirs_src,
                                       const std::vector<std::vector<double>>& rirs_noise,
                                       double snr_db) {
  clean.validate();
  if (clean.num_channels() != 1) throw std::invalid_argument("clean signal must be mono");
  if (rirs_src.empty()) throw std::invalid_argument("no source RIRs");
  const bool with_noise = !(std::isinf(snr_db) && snr_db > 0);
  if (with_noise) {
    noise.validate();
    if (noise.num_channels() != 1) throw std::invalid_argument("noise signal must be mono");
    if (noise.sample_rate != clean.sample_rate) throw std::invalid_argument("sample rates differ");
    if (rirs_noise.size() != rirs_src.size()) throw std::invalid_argument("RIR count mismatch");
  }

  std::size_t rir_len = 0;
  for (const auto& r : rirs_src) rir_len = std::max(rir_len, r.size());
  const std::size_t out_len = clean.length() + rir_len - 1;
  const std::size_t mics = rirs_src.size();

  signal::MultichannelWaveform speech(clean.sample_rate, mics, out_len);
  for (std::size_t m = 0; m < mics; ++m) {
    auto y = signal::fft_convolve(clean.channels[0], rirs_src[m]);
    std::copy_n(y.begin(), std::min(y.size(), out_len), speech.channels[m].begin());
  }
  const double ps = total_power(speech);
  if (!(ps > 0.0)) throw std::invalid_argument("zero-power source");
  if (!with_noise) return speech;

  // loop the noise over the output length
  std::vector<double> looped(out_len);
  const auto& n0 = noise.channels[0];
  if (n0.empty()) throw std::invalid_argument("empty noise signal");
  for (std::size_t i = 0; i < out_len; ++i) looped[i] = n0[i % n0.size()];

  signal::MultichannelWaveform spatial(clean.sample_rate, mics, out_len);
  for (std::size_t m = 0; m < mics; ++m) {
    auto y = signal::fft_convolve(looped, rirs_noise[m]);
    std::copy_n(y.begin(), out_len, spatial.channels[m].begin());
  }
  const double pn = total_power(spatial);
  if (!(pn > 0.0)) throw std::invalid_argument("zero-power noise");
  const double gain = std::sqrt(ps / (pn * std::pow(10.0, snr_db / 10.0)));
  for (std::size_t m = 0; m < mics; ++m)
    for (std::size_t i = 0; i < out_len; ++i) speech.channels[m][i] += gain * spatial.channels[m][i];
  return speech;
}

}  // namespace nbe2e::room
