#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "nbe2e/dsp/beamformer.hpp"
#include "nbe2e/dsp/fbank.hpp"
#include "nbe2e/room/rir.hpp"
#include "nbe2e/signal/fft.hpp"
#include "support.hpp"

using namespace nbe2e;
using namespace nbe2e::dsp;
using nbe2e::signal::MultichannelWaveform;

namespace {

struct Scene {
  room::RoomConfig room;
  room::ArrayGeometry array = room::ArrayGeometry::linear({4.0, 3.0, 1.2}, 2, 0.04);
  MultichannelWaveform speech, noise;
};

// Anechoic source at the given azimuth plus independent white noise per mic,
// kept as separate parts so SNR can be measured after beamforming.
Scene anechoic_scene(double azimuth, double noise_sigma, std::uint64_t seed, std::size_t len = 16000) {
  Scene s;
  s.room.dimensions = {8.0, 7.0, 3.0};
  std::mt19937_64 rng(seed);
  const auto clean = nbe2e::testing::white_noise(1, len, rng, 0.3);
  const auto src = s.array.center + room::azimuth_direction(azimuth) * 3.0;
  const auto rirs = room::simulate_array_rirs(s.room, s.array, src, 0, 512);
  s.speech = MultichannelWaveform(16000.0, 2, len);
  for (int m = 0; m < 2; ++m) {
    const auto y = signal::fft_convolve(clean.channels[0], rirs[m]);
    std::copy_n(y.begin(), len, s.speech.channels[m].begin());
  }
  s.noise = nbe2e::testing::white_noise(2, len, rng, noise_sigma);
  return s;
}

double power(const std::vector<double>& x, std::size_t skip = 600) {
  double p = 0.0;
  for (std::size_t i = skip; i + skip < x.size(); ++i) p += x[i] * x[i];
  return p;
}

MultichannelWaveform sum(const MultichannelWaveform& a, const MultichannelWaveform& b) {
  MultichannelWaveform r = a;
  for (std::size_t c = 0; c < r.num_channels(); ++c)
    for (std::size_t i = 0; i < r.length(); ++i) r.channels[c][i] += b.channels[c][i];
  return r;
}

double abs_error_deg(double a, double b) { return std::abs(room::wrap_azimuth(a - b)); }

}  // namespace

TEST_CASE("identical channels steered broadside pass through unchanged") {
  std::mt19937_64 rng(1);
  auto w = nbe2e::testing::white_noise(2, 3001, rng);
  w.channels[1] = w.channels[0];
  const auto array = room::ArrayGeometry::linear({0, 0, 0}, 2, 0.04);
  const auto y = delay_and_sum(w, array, 0.0);
  REQUIRE(y.size() == w.length());
  for (std::size_t i = 0; i < y.size(); ++i) REQUIRE(std::abs(y[i] - w.channels[0][i]) < 1e-12);
}

TEST_CASE("delay_and_sum is linear") {
  std::mt19937_64 rng(2);
  const auto x = nbe2e::testing::white_noise(2, 2000, rng), z = nbe2e::testing::white_noise(2, 2000, rng);
  const auto array = room::ArrayGeometry::linear({0, 0, 0}, 2, 0.04);
  MultichannelWaveform mix = x;
  for (int c = 0; c < 2; ++c)
    for (std::size_t i = 0; i < 2000; ++i) mix.channels[c][i] = 2.0 * x.channels[c][i] - 0.5 * z.channels[c][i];
  const auto yx = delay_and_sum(x, array, 33.0), yz = delay_and_sum(z, array, 33.0), ym = delay_and_sum(mix, array, 33.0);
  for (std::size_t i = 0; i < 2000; ++i) REQUIRE(std::abs(ym[i] - (2.0 * yx[i] - 0.5 * yz[i])) < 1e-12);
}

TEST_CASE("matched delay-and-sum gains 10 log10 C dB against uncorrelated noise") {
  for (double az : {30.0, -60.0, 90.0}) {
    CAPTURE(az);
    const auto s = anechoic_scene(az, 0.05, 3);
    const double in_snr = 10.0 * std::log10((power(s.speech.channels[0]) + power(s.speech.channels[1])) /
                                            (power(s.noise.channels[0]) + power(s.noise.channels[1])));
    const double out_snr = 10.0 * std::log10(power(delay_and_sum(s.speech, s.array, az)) /
                                             power(delay_and_sum(s.noise, s.array, az)));
    CHECK(out_snr - in_snr == doctest::Approx(10.0 * std::log10(2.0)).epsilon(1.0 / 3.0103).scale(0));
  }
}

TEST_CASE("steering away from an endfire source lowers output SNR") {
  const auto s = anechoic_scene(90.0, 0.05, 4);
  auto snr = [&](double steer) {
    return power(delay_and_sum(s.speech, s.array, steer)) / power(delay_and_sum(s.noise, s.array, steer));
  };
  CHECK(snr(-90.0) < snr(90.0));
}

TEST_CASE("GCC-PHAT finds zero lag on identical channels") {
  std::mt19937_64 rng(5);
  auto w = nbe2e::testing::white_noise(2, 8000, rng);
  w.channels[1] = w.channels[0];
  const auto array = room::ArrayGeometry::linear({0, 0, 0}, 2, 0.04);
  const auto est = estimate_doa_gccphat(w, array);
  CHECK(est.azimuth_deg == doctest::Approx(0.0).epsilon(1e-9));
  CHECK(est.confidence > 0.9);
}

TEST_CASE("GCC-PHAT closes the loop with the room simulator") {
  const auto s = anechoic_scene(45.0, 0.0, 6);
  CHECK(abs_error_deg(estimate_doa_gccphat(s.speech, s.array).azimuth_deg, 45.0) < 10.0);
  for (double az : {-70.0, -20.0, 0.0, 15.0, 60.0}) {
    CAPTURE(az);
    const auto t = anechoic_scene(az, 0.0, 7);
    CHECK(abs_error_deg(estimate_doa_gccphat(t.speech, t.array).azimuth_deg, az) < 10.0);
  }
}

TEST_CASE("noise degrades GCC-PHAT estimates") {
  double clean_err = 0.0, noisy_err = 0.0;
  for (int i = 0; i < 20; ++i) {
    const auto a = anechoic_scene(45.0, 0.0, 100 + i, 4000);
    const auto b = anechoic_scene(45.0, 1.0, 100 + i, 4000);
    // 0 dB: scale the noise to the speech power
    const double g = std::sqrt((power(b.speech.channels[0], 0) + power(b.speech.channels[1], 0)) /
                               (power(b.noise.channels[0], 0) + power(b.noise.channels[1], 0)));
    MultichannelWaveform n = b.noise;
    for (auto& ch : n.channels)
      for (auto& v : ch) v *= g;
    clean_err += abs_error_deg(estimate_doa_gccphat(a.speech, a.array).azimuth_deg, 45.0);
    noisy_err += abs_error_deg(estimate_doa_gccphat(sum(b.speech, n), b.array).azimuth_deg, 45.0);
  }
  CHECK(noisy_err > clean_err);
}

TEST_CASE("direction selection with injected errors") {
  const auto array = room::ArrayGeometry::linear({0, 0, 0}, 2, 0.04);
  const auto bank = LookDirectionBank::make(array, LookDirectionBank::default_directions());
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> az(-90.0, 90.0);
  for (int i = 0; i < 500; ++i) {
    const DoaEstimate d{az(rng), 1.0};
    const double nearest = bank.directions_deg[nearest_direction(bank, d.azimuth_deg)];
    REQUIRE(select_direction(bank, d, 0.0, rng) == nearest);
    REQUIRE(select_direction(bank, d, 1.0, rng) != nearest);
  }
  int wrong = 0;
  for (int i = 0; i < 10000; ++i) wrong += select_direction(bank, {12.0, 1.0}, 0.5, rng) != 0.0;
  CHECK(wrong / 10000.0 == doctest::Approx(0.5).epsilon(0.04).scale(0));
  CHECK_THROWS_AS(select_direction(bank, {0.0, 1.0}, 1.5, rng), std::invalid_argument);
}

TEST_CASE("nearest direction ignores a common rotation") {
  std::mt19937_64 rng(10);
  std::uniform_real_distribution<double> u(-180.0, 180.0);
  const auto array = room::ArrayGeometry::linear({0, 0, 0}, 2, 0.04);
  const std::vector<double> dirs{-90.0, -45.0, 0.0, 45.0, 90.0};
  const auto bank = LookDirectionBank::make(array, dirs);
  for (int i = 0; i < 1000; ++i) {
    const double shift = u(rng), a = u(rng);
    std::vector<double> rotated;
    for (double d : dirs) rotated.push_back(room::wrap_azimuth(d + shift));
    const auto rbank = LookDirectionBank::make(array, rotated);
    REQUIRE(nearest_direction(bank, a) == nearest_direction(rbank, room::wrap_azimuth(a + shift)));
  }
  CHECK(nearest_direction(bank, 180.0) == 0);  // -90 and 90 tie; lower index wins
  CHECK_THROWS_AS(LookDirectionBank::make(array, {10.0, 10.0}), std::invalid_argument);
  CHECK_THROWS_AS(LookDirectionBank::make(array, {-180.0}), std::invalid_argument);
}

TEST_CASE("mel filterbank shape") {
  CHECK(mel_to_hz(hz_to_mel(1234.5)) == doctest::Approx(1234.5));
  const MelFilterbank fb(40, 512, 16000.0, 0.0, 8000.0);
  CHECK(fb.num_filters() == 40);
  CHECK(fb.weights().cols() == 257);
  for (int f = 0; f < 40; ++f) {
    REQUIRE(fb.weights().row(f).sum() == doctest::Approx(1.0));
    REQUIRE(fb.weights().row(f).minCoeff() >= 0.0);
  }
  for (std::size_t i = 1; i < fb.centers_hz().size(); ++i) REQUIRE(fb.centers_hz()[i] > fb.centers_hz()[i - 1]);
}

TEST_CASE("dsp frontend on silence and white noise") {
  const auto array = room::ArrayGeometry::linear({0, 0, 0}, 2, 0.04);
  const auto bank = LookDirectionBank::make(array, LookDirectionBank::default_directions());
  std::mt19937_64 rng(11);
  const MultichannelWaveform silence(16000.0, 2, 8000);
  const Mat quiet = dsp_frontend(silence, array, bank, 0.0, rng);
  CHECK(quiet.cols() == 40);
  CHECK((quiet.array() == std::log(1e-7)).all());

  const auto noise = nbe2e::testing::white_noise(2, 160 * 102 + 400, rng);
  const Mat f = dsp_frontend(noise, array, bank, 0.0, rng);
  REQUIRE(f.rows() >= 100);
  REQUIRE(f.cols() == 40);
  // average band energies in dB across 100 frames
  const Eigen::RowVectorXd mean_db = (10.0 / std::log(10.0)) * f.topRows(100).colwise().mean();
  CHECK(mean_db.maxCoeff() - mean_db.minCoeff() < 6.0);
}

TEST_CASE("feature cache keeps float precision") {
  const auto dir = nbe2e::testing::scratch_dir("featcache");
  std::mt19937_64 rng(12);
  const Mat f = nbe2e::testing::random_mat(17, 40, rng);
  write_feature_cache(dir / "x.feat", f);
  const Mat g = read_feature_cache(dir / "x.feat");
  REQUIRE(g.rows() == 17);
  REQUIRE(g.cols() == 40);
  for (Eigen::Index i = 0; i < f.size(); ++i)
    REQUIRE(g.data()[i] == static_cast<double>(static_cast<float>(f.data()[i])));
  CHECK_THROWS_AS(read_feature_cache(dir / "none.feat"), std::runtime_error);
}
