#include <doctest.h>

#include <cmath>
#include <fstream>
#include <numbers>
#include <random>

#include "nbe2e/signal/complex.hpp"
#include "nbe2e/signal/fft.hpp"
#include "nbe2e/signal/stft.hpp"
#include "nbe2e/signal/wav.hpp"
#include "support.hpp"

using namespace nbe2e;
using namespace nbe2e::signal;
using nbe2e::testing::rel_err;

namespace {

// O(N^2) DFT of one zero-padded, windowed frame.
std::vector<std::complex<double>> naive_dft(const std::vector<double>& x, int n_fft) {
  std::vector<std::complex<double>> out(n_fft / 2 + 1);
  for (int k = 0; k <= n_fft / 2; ++k) {
    std::complex<double> acc;
    for (std::size_t n = 0; n < x.size(); ++n)
      acc += x[n] * std::polar(1.0, -2.0 * std::numbers::pi * k * static_cast<double>(n) / n_fft);
    out[k] = acc;
  }
  return out;
}

StftConfig rect(int L, int hop, int N) {
  StftConfig c;
  c.window_length = L;
  c.hop = hop;
  c.fft_size = N;
  c.window = WindowType::kRectangular;
  return c;
}

}  // namespace

TEST_CASE("stft of silence is zero") {
  MultichannelWaveform w(16000.0, 1, 1600);
  const auto X = stft(w, StftConfig{});
  CHECK(X.bins == 257);
  CHECK(X.frames == StftConfig{}.num_frames(1600));
  for (std::size_t i = 0; i < X.re.size(); ++i) {
    REQUIRE(X.re[i] == 0.0);
    REQUIRE(X.im[i] == 0.0);
  }
}

TEST_CASE("bin-centred cosine concentrates in its bin and matches a naive DFT") {
  const int N = 512, k0 = 37;
  MultichannelWaveform w(16000.0, 1, 2048);
  for (std::size_t n = 0; n < w.length(); ++n)
    w.channels[0][n] = std::cos(2.0 * std::numbers::pi * k0 * static_cast<double>(n) / N);
  const auto X = stft(w, rect(N, 256, N));
  for (int t = 0; t < X.frames; ++t) {
    const double peak = std::hypot(X.at(0, t, k0).re, X.at(0, t, k0).im);
    CHECK(peak == doctest::Approx(N / 2.0).epsilon(1e-9));
    for (int k = 0; k < X.bins; ++k) {
      if (k == k0) continue;
      const double m = std::hypot(X.at(0, t, k).re, X.at(0, t, k).im);
      REQUIRE(20.0 * std::log10(m / peak + 1e-300) < -60.0);
    }
  }
  const std::vector<double> frame(w.channels[0].begin() + 256, w.channels[0].begin() + 256 + N);
  const auto ref = naive_dft(frame, N);
  for (int k = 0; k < X.bins; ++k) {
    REQUIRE(std::abs(X.at(0, 1, k).re - ref[k].real()) < 1e-9);
    REQUIRE(std::abs(X.at(0, 1, k).im - ref[k].imag()) < 1e-9);
  }
}

TEST_CASE("windowed, zero-padded frames match the naive DFT") {
  std::mt19937_64 rng(5);
  const auto w = nbe2e::testing::white_noise(1, 1000, rng);
  StftConfig cfg;
  cfg.window_length = 200;
  cfg.hop = 80;
  cfg.fft_size = 256;
  const auto X = stft(w, cfg);
  const auto win = make_window(cfg.window, cfg.window_length);
  for (int t : {0, 3, X.frames - 1}) {
    std::vector<double> frame(cfg.window_length);
    for (int n = 0; n < cfg.window_length; ++n) frame[n] = w.channels[0][t * cfg.hop + n] * win[n];
    const auto ref = naive_dft(frame, cfg.fft_size);
    for (int k = 0; k < X.bins; ++k) {
      REQUIRE(std::abs(X.at(0, t, k).re - ref[k].real()) < 1e-10);
      REQUIRE(std::abs(X.at(0, t, k).im - ref[k].imag()) < 1e-10);
    }
  }
}

TEST_CASE("duplicated channel gives identical planes") {
  std::mt19937_64 rng(1);
  auto w = nbe2e::testing::white_noise(2, 3000, rng);
  w.channels[1] = w.channels[0];
  const auto X = stft(w, StftConfig{});
  for (int t = 0; t < X.frames; ++t)
    for (int k = 0; k < X.bins; ++k) REQUIRE(X.at(0, t, k) == X.at(1, t, k));
}

TEST_CASE("frame count and configuration checks") {
  StftConfig c;
  CHECK(c.num_frames(399) == 0);
  CHECK(c.num_frames(400) == 1);
  CHECK(c.num_frames(560) == 2);
  CHECK(c.num_frames(559) == 1);
  CHECK_THROWS_AS(stft(MultichannelWaveform(16000.0, 1, 100), c), std::invalid_argument);
  StftConfig bad = c;
  bad.fft_size = 500;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  bad = c;
  bad.hop = 401;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  bad = c;
  bad.window_length = 600;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
}

TEST_CASE("Parseval holds per frame for the rectangular window") {
  std::mt19937_64 rng(2);
  const auto w = nbe2e::testing::white_noise(1, 4000, rng);
  const auto cfg = rect(300, 150, 512);
  const auto X = stft(w, cfg);
  for (int t = 0; t < X.frames; ++t) {
    double et = 0.0;
    for (int n = 0; n < cfg.window_length; ++n) et += std::pow(w.channels[0][t * cfg.hop + n], 2);
    double ef = 0.0;
    for (int k = 0; k < X.bins; ++k) {
      const double m2 = std::pow(X.at(0, t, k).re, 2) + std::pow(X.at(0, t, k).im, 2);
      ef += (k == 0 || k == X.bins - 1) ? m2 : 2.0 * m2;
    }
    REQUIRE(rel_err(et, ef / cfg.fft_size) < 1e-6);
  }
}

TEST_CASE("stft is linear") {
  std::mt19937_64 rng(3);
  const auto x = nbe2e::testing::white_noise(2, 2000, rng);
  const auto y = nbe2e::testing::white_noise(2, 2000, rng);
  const double a = 0.7, b = -2.3;
  MultichannelWaveform z = x;
  for (int c = 0; c < 2; ++c)
    for (std::size_t n = 0; n < z.length(); ++n) z.channels[c][n] = a * x.channels[c][n] + b * y.channels[c][n];
  const auto X = stft(x, StftConfig{}), Y = stft(y, StftConfig{}), Z = stft(z, StftConfig{});
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < Z.re.size(); ++i) {
    num += std::pow(Z.re[i] - a * X.re[i] - b * Y.re[i], 2) + std::pow(Z.im[i] - a * X.im[i] - b * Y.im[i], 2);
    den += std::pow(Z.re[i], 2) + std::pow(Z.im[i], 2);
  }
  CHECK(std::sqrt(num / den) < 1e-9);
}

TEST_CASE("complex_mul_as_real identities") {
  CHECK(complex_mul_as_real({1, 0}, {2.5, -3}) == ComplexPair{2.5, -3});
  CHECK(complex_mul_as_real({0, 1}, {0, 1}) == ComplexPair{-1, 0});
}

TEST_CASE("complex_mul_as_real agrees with the 2x2 real matrix form") {
  std::mt19937_64 rng(4);
  std::normal_distribution<double> n;
  for (int i = 0; i < 1000; ++i) {
    const ComplexPair a{n(rng), n(rng)}, b{n(rng), n(rng)}, c{n(rng), n(rng)};
    // a as [[re, -im], [im, re]] acting on b as a column vector
    Eigen::Matrix2d A;
    A << a.re, -a.im, a.im, a.re;
    const Eigen::Vector2d v = A * Eigen::Vector2d(b.re, b.im);
    const auto ab = complex_mul_as_real(a, b);
    REQUIRE(std::abs(ab.re - v(0)) < 1e-14);
    REQUIRE(std::abs(ab.im - v(1)) < 1e-14);
    const auto ba = complex_mul_as_real(b, a);
    REQUIRE(std::abs(ab.re - ba.re) < 1e-14);
    REQUIRE(std::abs(ab.im - ba.im) < 1e-14);
    const auto l = complex_mul_as_real(ab, c), r = complex_mul_as_real(a, complex_mul_as_real(b, c));
    REQUIRE(std::abs(l.re - r.re) < 1e-12);
    REQUIRE(std::abs(l.im - r.im) < 1e-12);
  }
}

TEST_CASE("log_magnitude values") {
  CHECK(log_magnitude({1, 0}, 0.0) == 0.0);
  CHECK(log_magnitude({0, 0}, 1e-7) == doctest::Approx(-16.118095651).epsilon(1e-9));
  CHECK(log_magnitude({3, 4}, 0.0) == doctest::Approx(1.6094379124341003).epsilon(1e-14));
  CHECK(log_magnitude_grad({0, 0}, 1e-7) == ComplexPair{});
  const double h = 1e-6;
  const ComplexPair z{0.3, -1.2};
  const auto g = log_magnitude_grad(z, 1e-3);
  CHECK(g.re == doctest::Approx((log_magnitude({z.re + h, z.im}, 1e-3) - log_magnitude({z.re - h, z.im}, 1e-3)) / (2 * h)).epsilon(1e-8));
  CHECK(g.im == doctest::Approx((log_magnitude({z.re, z.im + h}, 1e-3) - log_magnitude({z.re, z.im - h}, 1e-3)) / (2 * h)).epsilon(1e-8));
}

TEST_CASE("fft_convolve matches direct convolution") {
  std::mt19937_64 rng(6);
  std::normal_distribution<double> n;
  std::vector<double> a(37), b(11);
  for (auto& x : a) x = n(rng);
  for (auto& x : b) x = n(rng);
  const auto y = fft_convolve(a, b);
  REQUIRE(y.size() == a.size() + b.size() - 1);
  for (std::size_t i = 0; i < y.size(); ++i) {
    double acc = 0.0;
    for (std::size_t j = 0; j < b.size(); ++j)
      if (i >= j && i - j < a.size()) acc += a[i - j] * b[j];
    REQUIRE(std::abs(y[i] - acc) < 1e-12);
  }
  CHECK(next_pow2(1) == 1);
  CHECK(next_pow2(513) == 1024);
}

TEST_CASE("waveform validation") {
  MultichannelWaveform w(16000.0, 2, 10);
  CHECK_NOTHROW(w.validate());
  w.channels[1].pop_back();
  CHECK_THROWS_AS(w.validate(), std::invalid_argument);
  MultichannelWaveform v(16000.0, 1, 4);
  v.channels[0][2] = std::nan("");
  CHECK_THROWS_AS(v.validate(), std::invalid_argument);
  v.channels[0][2] = 0.0;
  v.sample_rate = 0.0;
  CHECK_THROWS_AS(v.validate(), std::invalid_argument);
}

TEST_CASE("wav round trip is exact to 16-bit quantisation") {
  const auto dir = nbe2e::testing::scratch_dir("wav");
  std::mt19937_64 rng(7);
  auto w = nbe2e::testing::white_noise(3, 777, rng, 0.3);
  w.channels[0][0] = 2.0;  // clipped
  write_wav(dir / "a.wav", w);
  const auto r = read_wav(dir / "a.wav");
  REQUIRE(r.num_channels() == 3);
  REQUIRE(r.length() == 777);
  CHECK(r.sample_rate == 16000.0);
  CHECK(r.channels[0][0] == doctest::Approx(32767.0 / 32768.0));
  for (int c = 0; c < 3; ++c)
    for (std::size_t n = 1; n < 777; ++n) REQUIRE(std::abs(r.channels[c][n] - std::clamp(w.channels[c][n], -1.0, 1.0)) <= 0.5 / 32768.0 + 1e-12);
}

TEST_CASE("wav reader rejects other encodings") {
  const auto dir = nbe2e::testing::scratch_dir("wav_bad");
  const auto path = dir / "float.wav";
  {
    std::ofstream f(path, std::ios::binary);
    auto u32 = [&](std::uint32_t v) { f.write(reinterpret_cast<const char*>(&v), 4); };
    auto u16 = [&](std::uint16_t v) { f.write(reinterpret_cast<const char*>(&v), 2); };
    f.write("RIFF", 4);
    u32(36 + 8);
    f.write("WAVEfmt ", 8);
    u32(16);
    u16(3);  // IEEE float
    u16(1);
    u32(16000);
    u32(64000);
    u16(4);
    u16(32);
    f.write("data", 4);
    u32(8);
    u32(0);
    u32(0);
  }
  CHECK_THROWS_AS(read_wav(path), std::runtime_error);
  CHECK_THROWS_AS(read_wav(dir / "missing.wav"), std::runtime_error);
}
