#include "nbe2e/room/rir.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace nbe2e::room {
namespace {

constexpr int kSincHalf = 8;  // taps on each side; 16 in total

struct SincTables {
  std::array<double, 2 * kSincHalf> cos_m;
  std::array<double, 2 * kSincHalf> sin_m;
  SincTables() {
    const double a = std::numbers::pi / kSincHalf;
    for (int i = 0; i < 2 * kSincHalf; ++i) {
      const int m = i - kSincHalf + 1;
      cos_m[i] = std::cos(a * m);
      sin_m[i] = std::sin(a * m);
    }
  }
};

const SincTables& sinc_tables() {
  static const SincTables t;
  return t;
}

// Adds amp * w(n - delay) * sinc(n - delay) for the 16 taps around delay.
void add_fractional_impulse(std::vector<double>& h, double delay, double amp) {
  const auto& tab = sinc_tables();
  const double base = std::floor(delay);
  const double frac = delay - base;
  const auto n0 = static_cast<long long>(base);
  const double sin_pf = std::sin(std::numbers::pi * frac);
  const double a = std::numbers::pi / kSincHalf;
  const double cos_af = std::cos(a * frac), sin_af = std::sin(a * frac);
  const auto len = static_cast<long long>(h.size());
  for (int i = 0; i < 2 * kSincHalf; ++i) {
    const int m = i - kSincHalf + 1;
    const long long n = n0 + m;
    if (n < 0 || n >= len) continue;
    const double x = m - frac;
    double s;
    if (frac == 0.0) {
      s = (m == 0) ? 1.0 : 0.0;
    } else {
      // sin(pi (m - f)) = -(-1)^m sin(pi f)
      const double sign = (m % 2 == 0) ? -1.0 : 1.0;
      s = sign * sin_pf / (std::numbers::pi * x);
    }
    // cos(a (m - f)) by angle subtraction
    const double w = 0.5 * (1.0 + tab.cos_m[i] * cos_af + tab.sin_m[i] * sin_af);
    h[n] += amp * w * s;
  }
}

// Second-order Butterworth high-pass by the bilinear transform, in place.
void highpass(std::vector<double>& h, double cutoff, double fs) {
  const double k = std::tan(std::numbers::pi * cutoff / fs);
  const double q = std::numbers::sqrt2;
  const double norm = 1.0 / (1.0 + q * k + k * k);
  const double b0 = norm, b1 = -2.0 * norm, b2 = norm;
  const double a1 = 2.0 * (k * k - 1.0) * norm, a2 = (1.0 - q * k + k * k) * norm;
  double x1 = 0, x2 = 0, y1 = 0, y2 = 0;
  for (double& v : h) {
    const double y = b0 * v + b1 * x1 + b2 * x2 - a1 * y1 - a2 * y2;
    x2 = x1;
    x1 = v;
    y2 = y1;
    y1 = y;
    v = y;
  }
}

}  // namespace

std::size_t default_rir_length(const RoomConfig& room, const Vec3& mic, const Vec3& src) {
  const double direct = (mic - src).norm() / room.speed_of_sound;
  return static_cast<std::size_t>(std::ceil((direct + room.rt60) * room.sample_rate)) + 2 * kSincHalf;
}

std::vector<double> simulate_rir(const RoomConfig& room, const Vec3& mic, const Vec3& src,
                                 int max_order, std::size_t length) {
  room.validate();
  if (!room.contains(mic) || !room.contains(src)) throw std::invalid_argument("point outside room");
  if (length == 0) length = default_rir_length(room, mic, src);
  const double beta = wall_reflection(room);

  const double fs = room.sample_rate;
  const double c = room.speed_of_sound;
  const double max_dist = (static_cast<double>(length) + kSincHalf) / fs * c;
  const auto& L = room.dimensions;
  auto extent = [&](double side) {
    int n = static_cast<int>(std::ceil(max_dist / (2.0 * side))) + 1;
    if (max_order >= 0) n = std::min(n, max_order / 2 + 1);
    return n;
  };
  const int nx = extent(L.x), ny = extent(L.y), nz = extent(L.z);

  const int top_order = 2 * (nx + ny + nz) + 3;
  std::vector<double> beta_pow(top_order + 1, 1.0);
  for (int i = 1; i <= top_order; ++i) beta_pow[i] = beta_pow[i - 1] * beta;

  std::vector<double> h(length, 0.0);
  const double inv_4pi = 1.0 / (4.0 * std::numbers::pi);
  for (int mx = -nx; mx <= nx; ++mx) {
    for (int qx = 0; qx <= 1; ++qx) {
      const double dx = (1 - 2 * qx) * src.x + 2.0 * mx * L.x - mic.x;
      const int ox = std::abs(2 * mx - qx);
      if (std::abs(dx) > max_dist) continue;
      for (int my = -ny; my <= ny; ++my) {
        for (int qy = 0; qy <= 1; ++qy) {
          const double dy = (1 - 2 * qy) * src.y + 2.0 * my * L.y - mic.y;
          const int oy = std::abs(2 * my - qy);
          if (dx * dx + dy * dy > max_dist * max_dist) continue;
          for (int mz = -nz; mz <= nz; ++mz) {
            for (int qz = 0; qz <= 1; ++qz) {
              const int order = ox + oy + std::abs(2 * mz - qz);
              if (max_order >= 0 && order > max_order) continue;
              const double dz = (1 - 2 * qz) * src.z + 2.0 * mz * L.z - mic.z;
              const double d = std::sqrt(dx * dx + dy * dy + dz * dz);
              if (d > max_dist) continue;
              add_fractional_impulse(h, d / c * fs, beta_pow[order] * inv_4pi / d);
            }
          }
        }
      }
    }
  }
  if (room.highpass_hz > 0.0) highpass(h, room.highpass_hz, fs);
  return h;
}

std::vector<std::vector<double>> simulate_array_rirs(const RoomConfig& room,
                                                     const ArrayGeometry& geometry,
                                                     const Vec3& src, int max_order,
                                                     std::size_t length) {
  // A common length keeps the channels aligned.
  if (length == 0) {
    for (int m = 0; m < geometry.size(); ++m)
      length = std::max(length, default_rir_length(room, geometry.mic(m), src));
  }
  std::vector<std::vector<double>> rirs(geometry.size());
#pragma omp parallel for schedule(static)
  for (int m = 0; m < geometry.size(); ++m)
    rirs[m] = simulate_rir(room, geometry.mic(m), src, max_order, length);
  return rirs;
}

std::vector<double> schroeder_decay_db(const std::vector<double>& rir) {
  std::vector<double> edc(rir.size(), 0.0);
  double acc = 0.0;
  for (std::size_t i = rir.size(); i-- > 0;) {
    acc += rir[i] * rir[i];
    edc[i] = acc;
  }
  if (acc <= 0.0) throw std::invalid_argument("rir has zero energy");
  for (auto& e : edc) e = 10.0 * std::log10(std::max(e / acc, 1e-300));
  return edc;
}

double measure_rt60(const std::vector<double>& rir, double sample_rate) {
  const auto edc = schroeder_decay_db(rir);
  auto first_below = [&](double level) -> std::ptrdiff_t {
    for (std::size_t i = 0; i < edc.size(); ++i)
      if (edc[i] <= level) return static_cast<std::ptrdiff_t>(i);
    return -1;
  };
  const auto start = first_below(-5.0);
  auto stop = first_below(-35.0);
  if (stop < 0) stop = first_below(-25.0);
  if (start < 0 || stop <= start) throw std::runtime_error("decay curve too short to measure RT60");

  // least-squares slope of dB against seconds
  double st = 0, sy = 0, stt = 0, sty = 0;
  const double n = static_cast<double>(stop - start + 1);
  for (auto i = start; i <= stop; ++i) {
    const double t = static_cast<double>(i) / sample_rate;
    st += t;
    sy += edc[i];
    stt += t * t;
    sty += t * edc[i];
  }
  const double slope = (n * sty - st * sy) / (n * stt - st * st);
  if (slope >= 0.0) throw std::runtime_error("decay curve is not decreasing");
  return -60.0 / slope;
}

}  // namespace nbe2e::room
