#include "nbe2e/dsp/fbank.hpp"

#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <stdexcept>

namespace nbe2e::dsp {

double hz_to_mel(double hz) { return 2595.0 * std::log10(1.0 + hz / 700.0); }
double mel_to_hz(double mel) { return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0); }

MelFilterbank::MelFilterbank(int num_filters, int fft_size, double sample_rate, double fmin_hz,
                             double fmax_hz) {
  if (num_filters < 1) throw std::invalid_argument("need at least one mel filter");
  if (!(fmax_hz > fmin_hz) || fmax_hz > sample_rate / 2.0 + 1e-9)
    throw std::invalid_argument("invalid mel frequency range");
  const int bins = fft_size / 2 + 1;
  weights_ = Mat::Zero(num_filters, bins);
  const double mlo = hz_to_mel(fmin_hz), mhi = hz_to_mel(fmax_hz);
  std::vector<double> edges(num_filters + 2);
  for (int i = 0; i < num_filters + 2; ++i) edges[i] = mel_to_hz(mlo + (mhi - mlo) * i / (num_filters + 1));
  for (int f = 0; f < num_filters; ++f) {
    const double lo = edges[f], mid = edges[f + 1], hi = edges[f + 2];
    centers_.push_back(mid);
    for (int k = 0; k < bins; ++k) {
      const double hz = k * sample_rate / fft_size;
      double w = 0.0;
      if (hz > lo && hz <= mid) w = (hz - lo) / (mid - lo);
      else if (hz > mid && hz < hi) w = (hi - hz) / (hi - mid);
      weights_(f, k) = w;
    }
    const double sum = weights_.row(f).sum();
    if (!(sum > 0.0)) throw std::invalid_argument("mel filter covers no FFT bin; increase fft_size");
    weights_.row(f) /= sum;
  }
}

Mat MelFilterbank::log_energies(const signal::ComplexSpectrogram& spec, int channel, double eps) const {
  if (spec.bins != weights_.cols()) throw std::invalid_argument("mel filterbank size mismatch");
  Mat power(spec.frames, spec.bins);
  for (int t = 0; t < spec.frames; ++t)
    for (int k = 0; k < spec.bins; ++k) {
      const auto z = spec.at(channel, t, k);
      power(t, k) = z.re * z.re + z.im * z.im;
    }
  Mat e = power * weights_.transpose();
  return (e.array() + eps).log().matrix();
}

Mat dsp_frontend(const signal::MultichannelWaveform& wave, const room::ArrayGeometry& geometry,
                 const LookDirectionBank& bank, double error_rate, std::mt19937_64& rng,
                 const DspFrontendOptions& options) {
  dsp::GccPhatOptions gcc;
  gcc.stft = options.stft;
  const auto doa = estimate_doa_gccphat(wave, geometry, options.speed_of_sound, gcc);
  const double az = select_direction(bank, doa, error_rate, rng);
  signal::MultichannelWaveform mono(wave.sample_rate, 1, 0);
  mono.channels[0] = delay_and_sum(wave, geometry, az, options.speed_of_sound);
  const auto spec = signal::stft(mono, options.stft);
  const MelFilterbank fb(options.num_filters, options.stft.fft_size, wave.sample_rate, options.fmin_hz,
                         options.fmax_hz);
  return fb.log_energies(spec, 0, options.eps);
}

namespace {

void put_i32(std::ostream& out, std::int32_t v) {
  unsigned char b[4];
  for (int i = 0; i < 4; ++i) b[i] = static_cast<unsigned char>((static_cast<std::uint32_t>(v) >> (8 * i)) & 0xff);
  out.write(reinterpret_cast<const char*>(b), 4);
}

std::int32_t get_i32(std::istream& in) {
  unsigned char b[4];
  if (!in.read(reinterpret_cast<char*>(b), 4)) throw std::runtime_error("truncated feature cache");
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(b[i]) << (8 * i);
  return static_cast<std::int32_t>(v);
}

}  // namespace

void write_feature_cache(const std::filesystem::path& path, const Mat& features) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write feature cache " + path.string());
  put_i32(out, static_cast<std::int32_t>(features.rows()));
  put_i32(out, static_cast<std::int32_t>(features.cols()));
  for (Eigen::Index t = 0; t < features.rows(); ++t)
    for (Eigen::Index d = 0; d < features.cols(); ++d) {
      const float f = static_cast<float>(features(t, d));
      std::uint32_t bits;
      std::memcpy(&bits, &f, 4);
      put_i32(out, static_cast<std::int32_t>(bits));
    }
}

Mat read_feature_cache(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read feature cache " + path.string());
  const auto frames = get_i32(in), dim = get_i32(in);
  if (frames < 0 || dim < 0) throw std::runtime_error("corrupt feature cache header");
  Mat m(frames, dim);
  for (int t = 0; t < frames; ++t)
    for (int d = 0; d < dim; ++d) {
      const auto bits = static_cast<std::uint32_t>(get_i32(in));
      float f;
      std::memcpy(&f, &bits, 4);
      m(t, d) = f;
    }
  return m;
}

}  // namespace nbe2e::dsp
