#pragma once

#include <filesystem>
#include <random>
#include <vector>

#include "nbe2e/dsp/beamformer.hpp"
#include "nbe2e/linalg.hpp"
#include "nbe2e/signal/stft.hpp"

namespace nbe2e::dsp {

double hz_to_mel(double hz);
double mel_to_hz(double mel);

// Triangular filters equally spaced on the mel scale. Each filter's weights
// sum to one, so white noise gives a flat response.
class MelFilterbank {
 public:
  MelFilterbank(int num_filters, int fft_size, double sample_rate, double fmin_hz, double fmax_hz);

  int num_filters() const { return static_cast<int>(weights_.rows()); }
  // [num_filters x bins]
  const Mat& weights() const { return weights_; }
  // Unnormalised triangle peak positions in Hz.
  const std::vector<double>& centers_hz() const { return centers_; }

  // log(W |X|^2 + eps) for every frame of one channel; result is [frames x filters].
  Mat log_energies(const signal::ComplexSpectrogram& spec, int channel, double eps) const;

 private:
  Mat weights_;
  std::vector<double> centers_;
};

struct DspFrontendOptions {
  signal::StftConfig stft;
  int num_filters = 40;
  double fmin_hz = 0.0;
  double fmax_hz = 8000.0;
  double eps = 1e-7;
  double speed_of_sound = 343.0;
};

// DOA -> direction selection -> delay-and-sum -> STFT -> log mel energies.
// Returns [frames x num_filters].
Mat dsp_frontend(const signal::MultichannelWaveform& wave, const room::ArrayGeometry& geometry,
                 const LookDirectionBank& bank, double error_rate, std::mt19937_64& rng,
                 const DspFrontendOptions& options = {});

// Binary feature cache: int32 frames, int32 dim, then frames*dim float32,
// all little-endian.
void write_feature_cache(const std::filesystem::path& path, const Mat& features);
Mat read_feature_cache(const std::filesystem::path& path);

}  // namespace nbe2e::dsp
