#pragma once

#include <cmath>
#include <vector>

namespace nbe2e::room {

struct Vec3 {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  Vec3 operator+(const Vec3& o) const { return {x + o.x, y + o.y, z + o.z}; }
  Vec3 operator-(const Vec3& o) const { return {x - o.x, y - o.y, z - o.z}; }
  Vec3 operator*(double s) const { return {x * s, y * s, z * s}; }
  double dot(const Vec3& o) const { return x * o.x + y * o.y + z * o.z; }
  double norm() const { return std::sqrt(dot(*this)); }
};

// Frequency-independent wall absorption is derived from the target RT60.
// Sabine and Eyring assume a diffuse field. In a shoebox with uniform walls the
// image-source field is not diffuse: paths grazing the long axis meet few walls,
// so the tail decays slower than either formula predicts. kImageSource instead
// solves for the reflection coefficient whose image-source energy decay, fitted
// over -5 to -35 dB, reaches -60 dB at the target RT60.
enum class AbsorptionModel { kSabine, kEyring, kImageSource };

struct RoomConfig {
  Vec3 dimensions{6.0, 5.0, 3.0};  // meters
  double rt60 = 0.3;               // seconds
  double speed_of_sound = 343.0;
  double sample_rate = 16000.0;
  AbsorptionModel absorption = AbsorptionModel::kImageSource;
  // Every image adds a positive impulse, so the raw response carries a coherent
  // low-frequency build-up that lengthens the measured decay. A second-order
  // Butterworth high-pass at this cutoff removes it; 0 disables the filter.
  double highpass_hz = 50.0;

  bool contains(const Vec3& p) const {
    return p.x > 0.0 && p.y > 0.0 && p.z > 0.0 && p.x < dimensions.x && p.y < dimensions.y &&
           p.z < dimensions.z;
  }
  void validate() const;
};

// Pressure reflection coefficient shared by all six walls. Throws
// std::invalid_argument("absorption out of range") when the requested RT60
// needs an absorption coefficient above 1 (only possible under kSabine).
double wall_reflection(const RoomConfig& room);

// (-180, 180]
double wrap_azimuth(double deg);

// Unit vector in the horizontal plane for an azimuth measured from the array
// broadside (+y) towards the array axis (+x).
Vec3 azimuth_direction(double azimuth_deg);

// Microphones given as offsets from the array centre; the array axis is the
// room x axis.
struct ArrayGeometry {
  Vec3 center;
  std::vector<Vec3> offsets;

  static ArrayGeometry linear(const Vec3& center, int mics, double spacing);

  int size() const { return static_cast<int>(offsets.size()); }
  Vec3 mic(int i) const { return center + offsets[i]; }
  // Distance between the first two microphones (0 for a single mic).
  double spacing() const;
};

// Far-field arrival delay of each microphone relative to the array centre,
// in seconds, for a plane wave from the given azimuth.
std::vector<double> steering_delays(const ArrayGeometry& geometry, double azimuth_deg,
                                    double speed_of_sound);

}  // namespace nbe2e::room
