#pragma once

#include <limits>
#include <vector>

#include "nbe2e/signal/waveform.hpp"

namespace nbe2e::room {

// snr_db value meaning "no additive noise".
inline constexpr double kNoNoise = std::numeric_limits<double>::infinity();

// Convolves the mono clean signal with each microphone's source RIR and adds
// the mono noise (looped or cropped to length) spatialised through the noise
// RIRs, scaled so reverberant speech power over noise power, summed over all
// microphones and the whole output, equals snr_db.
signal::MultichannelWaveform mix_scene(const signal::MultichannelWaveform& clean,
                                       const signal::MultichannelWaveform& noise,
                                       const std::vector<std::vector<double>>& rirs_src,
                                       const std::vector<std::vector<double>>& rirs_noise,
                                       double snr_db);

// Total power ratio in dB of two equally shaped signals.
double power_ratio_db(const signal::MultichannelWaveform& a, const signal::MultichannelWaveform& b);

}  // namespace nbe2e::room
