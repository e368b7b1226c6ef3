#pragma once

#include <random>
#include <vector>

#include "nbe2e/room/geometry.hpp"
#include "nbe2e/signal/stft.hpp"
#include "nbe2e/signal/waveform.hpp"

namespace nbe2e::dsp {

// Fixed look directions with the per-microphone steering delays for each.
struct LookDirectionBank {
  std::vector<double> directions_deg;
  std::vector<std::vector<double>> delays_s;  // [direction][mic]

  static LookDirectionBank make(const room::ArrayGeometry& geometry, std::vector<double> directions_deg,
                                double speed_of_sound = 343.0);
  // {-90, -45, 0, 45, 90}
  static std::vector<double> default_directions();
};

struct DoaEstimate {
  double azimuth_deg = 0.0;
  double confidence = 0.0;  // GCC-PHAT peak height in [0, 1]
};

// Aligns every channel on the far-field arrival delays for azimuth_deg
// (fractional delays applied in the frequency domain) and averages them.
std::vector<double> delay_and_sum(const signal::MultichannelWaveform& wave,
                                  const room::ArrayGeometry& geometry, double azimuth_deg,
                                  double speed_of_sound = 343.0);

// Two-microphone GCC-PHAT. The lag of the frame-averaged phase-transform
// correlation peak (1/16-sample resolution plus parabolic refinement) is
// inverted through arcsin, so the answer lies in the front half-plane
// [-90, 90]. Only bins inside [fmin_hz, fmax_hz] vote: PHAT gives every bin
// unit weight, and near Nyquist the phase of band-limited signals is noise.
struct GccPhatOptions {
  signal::StftConfig stft;
  double fmin_hz = 100.0;
  double fmax_hz = 6000.0;
};
DoaEstimate estimate_doa_gccphat(const signal::MultichannelWaveform& wave,
                                 const room::ArrayGeometry& geometry, double speed_of_sound = 343.0,
                                 const GccPhatOptions& options = {});

// Nearest bank direction with probability 1 - error_rate, otherwise a
// uniformly drawn different bank direction.
double select_direction(const LookDirectionBank& bank, const DoaEstimate& doa, double error_rate,
                        std::mt19937_64& rng);

// Index of the bank direction closest to azimuth (wrap-around distance,
// ties to the lower index).
int nearest_direction(const LookDirectionBank& bank, double azimuth_deg);

}  // namespace nbe2e::dsp
