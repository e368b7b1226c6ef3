#include "nbe2e/room/geometry.hpp"

#include <cmath>
#include <mutex>
#include <numbers>
#include <stdexcept>
#include <vector>

namespace nbe2e::room {
namespace {

// Late image-source energy for a room of sides L: along direction u a path of
// length r meets r * g(u) walls, g(u) = |ux|/Lx + |uy|/Ly + |uz|/Lz, and the
// image density cancels spherical spreading. With a = -2 c ln(beta) the
// Schroeder integral from t is proportional to H(a t), where
//   H(s) = integral over the sphere of exp(-s g(u)) / g(u).
// Returns the least-squares slope of 10 log10(H(s) / H(0)) in dB per unit s
// over the -5..-35 dB range, sampled uniformly in s as measure_rt60 does.
double image_decay_slope(const Vec3& L) {
  constexpr int kQuad = 64;
  std::vector<double> g, w;
  g.reserve(kQuad * kQuad);
  w.reserve(kQuad * kQuad);
  const double h = 0.5 * std::numbers::pi / kQuad;
  for (int i = 0; i < kQuad; ++i) {
    const double th = (i + 0.5) * h;
    for (int j = 0; j < kQuad; ++j) {
      const double ph = (j + 0.5) * h;
      g.push_back(std::sin(th) * std::cos(ph) / L.x + std::sin(th) * std::sin(ph) / L.y +
                  std::cos(th) / L.z);
      w.push_back(std::sin(th));
    }
  }
  auto level = [&](double s) {
    double acc = 0.0;
    for (std::size_t k = 0; k < g.size(); ++k) acc += w[k] * std::exp(-s * g[k]) / g[k];
    return acc;
  };
  const double h0 = level(0.0);
  auto db = [&](double s) { return 10.0 * std::log10(level(s) / h0); };

  // The decay is fastest at s = 0, so -35 dB lies beyond 35 / (10 log10(e) gmax).
  double hi = 1.0;
  while (db(hi) > -35.0) hi *= 2.0;
  auto crossing = [&](double target) {
    double lo = 0.0, up = hi;
    for (int it = 0; it < 60; ++it) {
      const double mid = 0.5 * (lo + up);
      (db(mid) > target ? lo : up) = mid;
    }
    return up;
  };
  const double s5 = crossing(-5.0), s35 = crossing(-35.0);
  constexpr int kFit = 400;
  double st = 0, sy = 0, stt = 0, sty = 0;
  for (int k = 0; k <= kFit; ++k) {
    const double s = s5 + (s35 - s5) * k / kFit;
    const double y = db(s);
    st += s;
    sy += y;
    stt += s * s;
    sty += s * y;
  }
  const double n = kFit + 1;
  return (n * sty - st * sy) / (n * stt - st * st);
}

double cached_decay_slope(const Vec3& L) {
  struct Entry {
    Vec3 dims;
    double slope;
  };
  static std::mutex mu;
  static std::vector<Entry> cache;
  {
    std::lock_guard lock(mu);
    for (const auto& e : cache)
      if (e.dims.x == L.x && e.dims.y == L.y && e.dims.z == L.z) return e.slope;
  }
  const double slope = image_decay_slope(L);
  std::lock_guard lock(mu);
  if (cache.size() >= 64) cache.erase(cache.begin());
  cache.push_back({L, slope});
  return slope;
}

}  // namespace

void RoomConfig::validate() const {
  if (!(dimensions.x > 0.0 && dimensions.y > 0.0 && dimensions.z > 0.0))
    throw std::invalid_argument("room dimensions must be positive");
  if (!(rt60 > 0.0)) throw std::invalid_argument("rt60 must be positive");
  if (!(speed_of_sound > 0.0) || !(sample_rate > 0.0))
    throw std::invalid_argument("speed of sound and sample rate must be positive");
  if (!(highpass_hz >= 0.0) || highpass_hz >= 0.5 * sample_rate)
    throw std::invalid_argument("high-pass cutoff must lie in [0, fs/2)");
}

double wall_reflection(const RoomConfig& room) {
  room.validate();
  const auto& d = room.dimensions;
  const double volume = d.x * d.y * d.z;
  const double surface = 2.0 * (d.x * d.y + d.x * d.z + d.y * d.z);
  // 24 ln(10) / c, i.e. 0.161 s/m at c = 343 m/s
  const double k = 24.0 * std::numbers::ln10 / room.speed_of_sound;
  if (room.absorption == AbsorptionModel::kImageSource) {
    // RT60 = -60 / (slope * a), a = -2 c ln(beta)
    const double a = -60.0 / (cached_decay_slope(d) * room.rt60);
    return std::exp(-a / (2.0 * room.speed_of_sound));
  }
  double alpha = 0.0;
  switch (room.absorption) {
    case AbsorptionModel::kSabine: alpha = k * volume / (surface * room.rt60); break;
    case AbsorptionModel::kEyring: alpha = 1.0 - std::exp(-k * volume / (surface * room.rt60)); break;
    case AbsorptionModel::kImageSource: break;
  }
  if (!(alpha > 0.0) || alpha > 1.0) throw std::invalid_argument("absorption out of range");
  return std::sqrt(1.0 - alpha);
}

double wrap_azimuth(double deg) {
  double a = std::fmod(deg, 360.0);
  if (a <= -180.0) a += 360.0;
  if (a > 180.0) a -= 360.0;
  return a;
}

Vec3 azimuth_direction(double azimuth_deg) {
  const double a = azimuth_deg * std::numbers::pi / 180.0;
  return {std::sin(a), std::cos(a), 0.0};
}

ArrayGeometry ArrayGeometry::linear(const Vec3& center, int mics, double spacing) {
  if (mics < 1) throw std::invalid_argument("array needs at least one microphone");
  ArrayGeometry g;
  g.center = center;
  const double first = -0.5 * spacing * (mics - 1);
  for (int i = 0; i < mics; ++i) g.offsets.push_back({first + spacing * i, 0.0, 0.0});
  return g;
}

double ArrayGeometry::spacing() const {
  if (offsets.size() < 2) return 0.0;
  return (offsets[1] - offsets[0]).norm();
}

std::vector<double> steering_delays(const ArrayGeometry& geometry, double azimuth_deg,
                                    double speed_of_sound) {
  const Vec3 u = azimuth_direction(azimuth_deg);
  std::vector<double> delays(geometry.offsets.size());
  for (std::size_t m = 0; m < delays.size(); ++m)
    delays[m] = -geometry.offsets[m].dot(u) / speed_of_sound;
  return delays;
}

}  // namespace nbe2e::room
