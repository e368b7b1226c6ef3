#include "nbe2e/room/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <stdexcept>

#include <json.hpp>

#include "nbe2e/room/mix.hpp"
#include "nbe2e/room/rir.hpp"
#include "nbe2e/signal/wav.hpp"

namespace nbe2e::room {
namespace {

double uniform(std::mt19937_64& rng, const Range& r) {
  return std::uniform_real_distribution<double>(r.lo, r.hi)(rng);
}

std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

// Places a point at the given horizontal azimuth from the array centre. The
// 3-D distance is drawn from spec.distance; returns false if it cannot fit.
bool place(const DatasetSpec& spec, const RoomConfig& room, const Vec3& center, double height,
           Range azimuths, std::mt19937_64& rng, Vec3* out, double* azimuth, double* distance) {
  constexpr double kMargin = 0.2;
  const double az = wrap_azimuth(uniform(rng, azimuths));
  const double d3 = uniform(rng, spec.distance);
  const double dz = height - center.z;
  if (d3 <= std::abs(dz)) return false;
  const double rh = std::sqrt(d3 * d3 - dz * dz);
  const Vec3 p = center + azimuth_direction(az) * rh + Vec3{0.0, 0.0, dz};
  const auto& L = room.dimensions;
  if (p.x < kMargin || p.y < kMargin || p.x > L.x - kMargin || p.y > L.y - kMargin) return false;
  *out = p;
  *azimuth = az;
  *distance = d3;
  return true;
}

}  // namespace

std::vector<WordSignature> default_lexicon() {
  static const char* kWords[] = {"alpha", "bravo", "charlie", "delta", "echo", "foxtrot",
                                 "golf",  "hotel", "india",   "juliet", "kilo", "lima"};
  constexpr double kLow[] = {350, 450, 550, 650, 750, 850};
  constexpr double kMid[] = {1100, 1300, 1500, 1700};
  constexpr double kHigh[] = {2400, 2800, 3200, 3600};
  std::vector<WordSignature> lex;
  // (i mod 6, i mod 4) is unique for i < 12, so every triple is distinct
  for (int i = 0; i < 12; ++i) lex.push_back({kWords[i], {kLow[i % 6], kMid[i % 4], kHigh[(i / 3) % 4]}});
  return lex;
}

std::vector<double> synthesize_word(const WordSignature& sig, double sample_rate, double duration_s,
                                    double gain, std::mt19937_64& rng) {
  const auto n = static_cast<std::size_t>(std::lround(duration_s * sample_rate));
  std::vector<double> out(n, 0.0);
  std::uniform_real_distribution<double> phase(0.0, 2.0 * std::numbers::pi);
  for (double f : sig.freqs_hz) {
    const double ph = phase(rng);
    const double w = 2.0 * std::numbers::pi * f / sample_rate;
    for (std::size_t i = 0; i < n; ++i) out[i] += std::sin(w * static_cast<double>(i) + ph);
  }
  for (std::size_t i = 0; i < n; ++i) {
    const double env = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * (i + 0.5) / n);
    out[i] *= gain * env / 3.0;
  }
  return out;
}

void DatasetSpec::validate() const {
  auto check = [](const Range& r, const char* name, double floor) {
    if (!(r.lo <= r.hi) || r.lo < floor) throw std::invalid_argument(std::string("invalid range ") + name);
  };
  check(room_x, "room_x", 1.0);
  check(room_y, "room_y", 1.0);
  check(room_z, "room_z", 1.0);
  check(rt60, "rt60", 1e-3);
  check(distance, "distance", 0.0);
  check(source_height, "source_height", 0.0);
  check(noise_height, "noise_height", 0.0);
  check(array_height, "array_height", 0.0);
  check(snr_db, "snr_db", -100.0);
  check(word_gap_s, "word_gap_s", 0.0);
  check(source_azimuth, "source_azimuth", -180.0);
  if (source_azimuth.hi > 180.0) throw std::invalid_argument("invalid range source_azimuth");
  if (!(sample_rate > 0.0)) throw std::invalid_argument("sample_rate must be positive");
  if (mics < 1 || !(spacing_m > 0.0)) throw std::invalid_argument("invalid array");
  if (min_words < 1 || max_words < min_words) throw std::invalid_argument("invalid word count range");
  if (!(snr_std_db > 0.0)) throw std::invalid_argument("snr_std_db must be positive");
}

std::mt19937_64 utterance_rng(std::uint64_t seed, const std::string& split, std::uint64_t index) {
  const std::uint64_t h = fnv1a(split);
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(h), static_cast<std::uint32_t>(h >> 32),
                    static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32)};
  return std::mt19937_64(seq);
}

double sample_snr_db(const DatasetSpec& spec, std::mt19937_64& rng) {
  std::normal_distribution<double> normal(spec.snr_mean_db, spec.snr_std_db);
  for (;;) {
    const double v = normal(rng);
    if (v >= spec.snr_db.lo && v <= spec.snr_db.hi) return v;
  }
}

SceneDraw draw_scene(const DatasetSpec& spec, int lexicon_size, std::mt19937_64& rng) {
  spec.validate();
  SceneDraw s;
  for (int attempt = 0;; ++attempt) {
    if (attempt > 10000) throw std::runtime_error("could not place source and noise in sampled rooms");
    s.room.dimensions = {uniform(rng, spec.room_x), uniform(rng, spec.room_y), uniform(rng, spec.room_z)};
    s.room.rt60 = uniform(rng, spec.rt60);
    s.room.speed_of_sound = spec.speed_of_sound;
    s.room.sample_rate = spec.sample_rate;
    const auto& L = s.room.dimensions;
    const double half = 0.5 * spec.spacing_m * (spec.mics - 1);
    const Vec3 center{std::uniform_real_distribution<double>(1.0 + half, L.x - 1.0 - half)(rng),
                      std::uniform_real_distribution<double>(1.0, L.y - 1.0)(rng),
                      std::clamp(uniform(rng, spec.array_height), 0.2, L.z - 0.2)};
    s.array = ArrayGeometry::linear(center, spec.mics, spec.spacing_m);

    bool placed = false;
    for (int k = 0; k < 64 && !placed; ++k) {
      const double h = std::clamp(uniform(rng, spec.source_height), 0.1, L.z - 0.1);
      placed = place(spec, s.room, center, h, spec.source_azimuth, rng, &s.source, &s.azimuth_deg, &s.source_distance);
    }
    if (!placed) continue;
    placed = false;
    for (int k = 0; k < 64 && !placed; ++k) {
      const double h = std::clamp(uniform(rng, spec.noise_height), 0.1, L.z - 0.1);
      double az = 0, dist = 0;
      placed = place(spec, s.room, center, h, Range{-180.0, 180.0}, rng, &s.noise, &az, &dist);
    }
    if (!placed) continue;
    break;
  }
  s.snr_db = spec.add_noise ? sample_snr_db(spec, rng) : kNoNoise;
  const int n = std::uniform_int_distribution<int>(spec.min_words, spec.max_words)(rng);
  std::uniform_int_distribution<int> pick(0, lexicon_size - 1);
  for (int i = 0; i < n; ++i) s.words.push_back(pick(rng));
  return s;
}

signal::MultichannelWaveform render_scene(const DatasetSpec& spec, const SceneDraw& scene,
                                          const std::vector<WordSignature>& lexicon,
                                          std::mt19937_64& rng) {
  const double fs = spec.sample_rate;
  const auto lead = static_cast<std::size_t>(std::lround(spec.lead_silence_s * fs));
  signal::MultichannelWaveform clean(fs, 1, 0);
  auto& x = clean.channels[0];
  x.assign(lead, 0.0);
  std::uniform_real_distribution<double> gain(0.6, 1.0);
  for (std::size_t i = 0; i < scene.words.size(); ++i) {
    const auto w = synthesize_word(lexicon.at(scene.words[i]), fs, spec.word_duration_s, gain(rng), rng);
    x.insert(x.end(), w.begin(), w.end());
    if (i + 1 < scene.words.size()) {
      const auto gap = static_cast<std::size_t>(std::lround(uniform(rng, spec.word_gap_s) * fs));
      x.insert(x.end(), gap, 0.0);
    }
  }
  x.insert(x.end(), lead, 0.0);

  const auto rirs_src = simulate_array_rirs(scene.room, scene.array, scene.source, -1);
  signal::MultichannelWaveform noise(fs, 1, x.size());
  std::vector<std::vector<double>> rirs_noise;
  if (spec.add_noise) {
    std::normal_distribution<double> normal(0.0, 1.0);
    for (double& v : noise.channels[0]) v = normal(rng);
    rirs_noise = simulate_array_rirs(scene.room, scene.array, scene.noise, -1);
  }
  auto mixed = mix_scene(clean, noise, rirs_src, rirs_noise, spec.add_noise ? scene.snr_db : kNoNoise);

  double peak = 0.0;
  for (const auto& ch : mixed.channels)
    for (double v : ch) peak = std::max(peak, std::abs(v));
  if (peak > 0.0)
    for (auto& ch : mixed.channels)
      for (double& v : ch) v *= 0.5 / peak;
  return mixed;
}

std::vector<UtteranceRecord> generate_dataset(const DatasetSpec& spec,
                                              const std::vector<WordSignature>& lexicon,
                                              int n_utts, std::uint64_t seed,
                                              const std::filesystem::path& out_dir,
                                              const std::string& split) {
  spec.validate();
  if (lexicon.empty()) throw std::invalid_argument("empty lexicon");
  std::error_code ec;
  std::filesystem::create_directories(out_dir / split, ec);
  if (ec) throw std::runtime_error("cannot create output directory " + (out_dir / split).string());

  std::vector<UtteranceRecord> records(n_utts);
  std::string error;
#pragma omp parallel for schedule(dynamic)
  for (int i = 0; i < n_utts; ++i) {
    try {
      auto rng = utterance_rng(seed, split, static_cast<std::uint64_t>(i));
      const auto scene = draw_scene(spec, static_cast<int>(lexicon.size()), rng);
      const auto wave = render_scene(spec, scene, lexicon, rng);
      char name[64];
      std::snprintf(name, sizeof(name), "%s_%05d", split.c_str(), i);
      const std::string rel = split + "/" + name + ".wav";
      signal::write_wav(out_dir / rel, wave);

      UtteranceRecord r;
      r.id = name;
      r.path = rel;
      for (std::size_t w = 0; w < scene.words.size(); ++w) {
        if (w) r.transcript += ' ';
        r.transcript += lexicon[scene.words[w]].word;
      }
      r.azimuth_deg = scene.azimuth_deg;
      r.snr_db = spec.add_noise ? scene.snr_db : kNoNoise;
      r.rt60_s = scene.room.rt60;
      r.spacing_m = spec.spacing_m;
      r.split = split;
      records[i] = std::move(r);
    } catch (const std::exception& e) {
#pragma omp critical
      error = e.what();
    }
  }
  if (!error.empty()) throw std::runtime_error(error);
  write_manifest(out_dir / (split + ".jsonl"), records);
  return records;
}

void write_manifest(const std::filesystem::path& path, const std::vector<UtteranceRecord>& records) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write manifest " + path.string());
  for (const auto& r : records) {
    nlohmann::ordered_json j;
    j["id"] = r.id;
    j["path"] = r.path;
    j["transcript"] = r.transcript;
    j["azimuth_deg"] = r.azimuth_deg;
    // JSON has no infinity; a missing noise term is written as null
    if (std::isfinite(r.snr_db)) j["snr_db"] = r.snr_db;
    else j["snr_db"] = nullptr;
    j["rt60_s"] = r.rt60_s;
    j["spacing_m"] = r.spacing_m;
    j["split"] = r.split;
    out << j.dump() << '\n';
  }
}

std::vector<UtteranceRecord> read_manifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read manifest " + path.string());
  std::vector<UtteranceRecord> records;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    try {
      const auto j = nlohmann::json::parse(line);
      UtteranceRecord r;
      r.id = j.value("id", "");
      r.path = j.at("path").get<std::string>();
      r.transcript = j.at("transcript").get<std::string>();
      r.azimuth_deg = j.at("azimuth_deg").get<double>();
      r.snr_db = j.at("snr_db").is_null() ? kNoNoise : j.at("snr_db").get<double>();
      r.rt60_s = j.at("rt60_s").get<double>();
      r.spacing_m = j.at("spacing_m").get<double>();
      r.split = j.at("split").get<std::string>();
      if (r.id.empty()) r.id = std::filesystem::path(r.path).stem().string();
      records.push_back(std::move(r));
    } catch (const nlohmann::json::exception& e) {
      throw std::runtime_error(path.string() + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
  return records;
}

}  // namespace nbe2e::room
