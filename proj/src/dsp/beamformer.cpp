#include "nbe2e/dsp/beamformer.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <stdexcept>

#include "nbe2e/signal/fft.hpp"

namespace nbe2e::dsp {
namespace {

void check_azimuth(double azimuth_deg) {
  if (!(azimuth_deg > -180.0 && azimuth_deg <= 180.0)) throw std::invalid_argument("azimuth out of range");
}

double angular_distance(double a, double b) { return std::abs(room::wrap_azimuth(a - b)); }

}  // namespace

LookDirectionBank LookDirectionBank::make(const room::ArrayGeometry& geometry,
                                          std::vector<double> directions_deg, double speed_of_sound) {
  LookDirectionBank bank;
  for (std::size_t i = 0; i < directions_deg.size(); ++i) {
    check_azimuth(directions_deg[i]);
    for (std::size_t j = 0; j < i; ++j)
      if (directions_deg[i] == directions_deg[j]) throw std::invalid_argument("duplicate look direction");
    bank.delays_s.push_back(room::steering_delays(geometry, directions_deg[i], speed_of_sound));
  }
  bank.directions_deg = std::move(directions_deg);
  return bank;
}

std::vector<double> LookDirectionBank::default_directions() { return {-90.0, -45.0, 0.0, 45.0, 90.0}; }

std::vector<double> delay_and_sum(const signal::MultichannelWaveform& wave,
                                  const room::ArrayGeometry& geometry, double azimuth_deg,
                                  double speed_of_sound) {
  wave.validate();
  check_azimuth(azimuth_deg);
  const int channels = static_cast<int>(wave.num_channels());
  if (channels < 2) throw std::invalid_argument("delay_and_sum needs at least two channels");
  if (geometry.size() != channels) throw std::invalid_argument("geometry does not match channel count");

  const auto delays = room::steering_delays(geometry, azimuth_deg, speed_of_sound);
  double max_shift = 0.0;
  for (double d : delays) max_shift = std::max(max_shift, std::abs(d) * wave.sample_rate);
  const std::size_t len = wave.length();
  signal::RealFft fft(signal::next_pow2(static_cast<long long>(len + 2 * std::ceil(max_shift) + 2)));
  const int n = fft.size();

  std::vector<std::complex<double>> acc(fft.bins()), spec(fft.bins());
  for (int m = 0; m < channels; ++m) {
    fft.forward(wave.channels[m], spec);
    // advance channel m by its arrival delay: x_m(t + tau_m)
    const double phase = 2.0 * std::numbers::pi * delays[m] * wave.sample_rate / n;
    for (int k = 0; k < fft.bins(); ++k) acc[k] += spec[k] * std::polar(1.0, phase * k);
  }
  for (auto& v : acc) v /= static_cast<double>(channels);
  std::vector<double> out(len);
  fft.inverse(acc, out);
  return out;
}

DoaEstimate estimate_doa_gccphat(const signal::MultichannelWaveform& wave,
                                 const room::ArrayGeometry& geometry, double speed_of_sound,
                                 const GccPhatOptions& options) {
  const auto& cfg = options.stft;
  wave.validate();
  if (wave.num_channels() != 2 || geometry.size() != 2)
    throw std::invalid_argument("GCC-PHAT DOA needs exactly two channels");
  const double baseline = geometry.offsets[1].x - geometry.offsets[0].x;
  const double max_lag = std::abs(baseline) * wave.sample_rate / speed_of_sound;
  if (max_lag < 1.0) throw std::invalid_argument("array too small to resolve");

  const auto spec = signal::stft(wave, cfg);
  const int bins = spec.bins;
  const double bin_hz = wave.sample_rate / cfg.fft_size;
  const int k_lo = std::max(0, static_cast<int>(std::ceil(options.fmin_hz / bin_hz)));
  const int k_hi = std::min(bins - 1, static_cast<int>(std::floor(options.fmax_hz / bin_hz)));
  if (k_lo > k_hi) throw std::invalid_argument("empty GCC-PHAT band");
  std::vector<std::complex<double>> cross(bins);
  for (int t = 0; t < spec.frames; ++t) {
    for (int k = k_lo; k <= k_hi; ++k) {
      const auto a = spec.at(0, t, k), b = spec.at(1, t, k);
      const std::complex<double> g = std::complex<double>(a.re, a.im) * std::conj(std::complex<double>(b.re, b.im));
      const double mag = std::abs(g);
      if (mag > 1e-20) cross[k] += g / mag;
    }
  }
  for (auto& v : cross) v /= static_cast<double>(spec.frames);

  constexpr int kUpsample = 16;
  signal::RealFft ifft(cfg.fft_size * kUpsample);
  std::vector<std::complex<double>> padded(ifft.bins());
  std::copy(cross.begin(), cross.end(), padded.begin());
  std::vector<double> corr(ifft.size());
  ifft.inverse(padded, corr);

  const int span = static_cast<int>(std::ceil(max_lag * kUpsample));
  const int m = ifft.size();
  auto at = [&](int lag) { return corr[(lag % m + m) % m]; };
  int best = 0;
  double best_val = -1e300;
  for (int lag = -span; lag <= span; ++lag) {
    if (at(lag) > best_val) {
      best_val = at(lag);
      best = lag;
    }
  }
  double refined = best;
  const double l = at(best - 1), c = at(best), r = at(best + 1);
  const double denom = l - 2.0 * c + r;
  if (denom < 0.0) refined += std::clamp(0.5 * (l - r) / denom, -0.5, 0.5);

  // r(l) peaks at l = tau_0 - tau_1 = baseline * sin(theta) / c
  const double lag_samples = refined / kUpsample;
  const double s = std::clamp(lag_samples * speed_of_sound / (baseline * wave.sample_rate), -1.0, 1.0);
  DoaEstimate est;
  est.azimuth_deg = std::asin(s) * 180.0 / std::numbers::pi;
  if (est.azimuth_deg <= -180.0) est.azimuth_deg = 180.0;
  est.confidence = std::clamp(best_val * m / (2.0 * (k_hi - k_lo + 1)), 0.0, 1.0);
  return est;
}

int nearest_direction(const LookDirectionBank& bank, double azimuth_deg) {
  if (bank.directions_deg.empty()) throw std::invalid_argument("empty look direction bank");
  int best = 0;
  for (int i = 1; i < static_cast<int>(bank.directions_deg.size()); ++i) {
    if (angular_distance(bank.directions_deg[i], azimuth_deg) <
        angular_distance(bank.directions_deg[best], azimuth_deg))
      best = i;
  }
  return best;
}

double select_direction(const LookDirectionBank& bank, const DoaEstimate& doa, double error_rate,
                        std::mt19937_64& rng) {
  if (!(error_rate >= 0.0 && error_rate <= 1.0)) throw std::invalid_argument("error_rate must be in [0, 1]");
  const int nearest = nearest_direction(bank, doa.azimuth_deg);
  const int n = static_cast<int>(bank.directions_deg.size());
  const bool wrong = std::bernoulli_distribution(error_rate)(rng);
  if (!wrong || n < 2) return bank.directions_deg[nearest];
  int j = std::uniform_int_distribution<int>(0, n - 2)(rng);
  if (j >= nearest) ++j;
  return bank.directions_deg[j];
}

}  // namespace nbe2e::dsp
