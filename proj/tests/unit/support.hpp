#pragma once

#include <cmath>
#include <complex>
#include <filesystem>
#include <random>
#include <string>

#include "nbe2e/linalg.hpp"
#include "nbe2e/signal/waveform.hpp"

namespace nbe2e::testing {

inline Mat random_mat(Eigen::Index r, Eigen::Index c, std::mt19937_64& rng, double scale = 1.0) {
  std::normal_distribution<double> n(0.0, scale);
  Mat m(r, c);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = n(rng);
  return m;
}

inline CMat random_cmat(Eigen::Index r, Eigen::Index c, std::mt19937_64& rng, double scale = 1.0) {
  std::normal_distribution<double> n(0.0, scale);
  CMat m(r, c);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = {n(rng), n(rng)};
  return m;
}

inline signal::MultichannelWaveform white_noise(int channels, std::size_t length, std::mt19937_64& rng,
                                                double sigma = 0.1, double rate = 16000.0) {
  signal::MultichannelWaveform w(rate, channels, length);
  std::normal_distribution<double> n(0.0, sigma);
  for (auto& ch : w.channels)
    for (auto& x : ch) x = n(rng);
  return w;
}

inline double rel_err(double a, double b) { return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-300}); }

// Fresh scratch directory below the system temp dir.
inline std::filesystem::path scratch_dir(const std::string& name) {
  auto p = std::filesystem::temp_directory_path() / ("nbe2e_test_" + name);
  std::filesystem::remove_all(p);
  std::filesystem::create_directories(p);
  return p;
}

}  // namespace nbe2e::testing
