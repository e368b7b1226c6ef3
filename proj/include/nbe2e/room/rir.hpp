#pragma once

#include <cstddef>
#include <vector>

#include "nbe2e/room/geometry.hpp"

namespace nbe2e::room {

// Image-source room impulse response between two points strictly inside the
// room. Image amplitudes are beta^reflections / (4 pi d); each image is
// rendered with a 16-tap Hann-windowed sinc so fractional delays survive.
//
// max_order < 0 bounds the image set by the response length only.
// length == 0 picks rt60 * fs plus the direct-path delay.
std::vector<double> simulate_rir(const RoomConfig& room, const Vec3& mic, const Vec3& src,
                                 int max_order, std::size_t length = 0);

// One response per microphone of the array.
std::vector<std::vector<double>> simulate_array_rirs(const RoomConfig& room,
                                                     const ArrayGeometry& geometry,
                                                     const Vec3& src, int max_order,
                                                     std::size_t length = 0);

// Default response length used by simulate_rir when length == 0.
std::size_t default_rir_length(const RoomConfig& room, const Vec3& mic, const Vec3& src);

// Schroeder backward-integrated energy decay in dB, normalised to 0 dB at t=0.
std::vector<double> schroeder_decay_db(const std::vector<double>& rir);

// RT60 from a least-squares line through the -5..-35 dB span of the Schroeder
// curve (falls back to -5..-25 dB when the curve is too short).
double measure_rt60(const std::vector<double>& rir, double sample_rate);

}  // namespace nbe2e::room
