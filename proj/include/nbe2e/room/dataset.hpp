#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "nbe2e/room/geometry.hpp"
#include "nbe2e/signal/waveform.hpp"

namespace nbe2e::room {

// A synthetic "word": three sinusoids under a shared Hann envelope.
struct WordSignature {
  std::string word;
  std::array<double, 3> freqs_hz;
};

// Twelve words with distinct tone triples in 350..3600 Hz.
std::vector<WordSignature> default_lexicon();

// One rendering of a word with random tone phases.
std::vector<double> synthesize_word(const WordSignature& sig, double sample_rate, double duration_s,
                                    double gain, std::mt19937_64& rng);

struct Range {
  double lo = 0.0;
  double hi = 0.0;
};

// Sampling ranges for simulated scenes.
struct DatasetSpec {
  double sample_rate = 16000.0;
  double speed_of_sound = 343.0;
  Range room_x{4.0, 8.0};
  Range room_y{4.0, 8.0};
  Range room_z{2.5, 3.5};
  Range rt60{0.05, 0.5};
  Range distance{0.5, 7.0};
  // Sources stay in the front half-plane, where a 2-mic DOA is unambiguous.
  // Noise sources may come from anywhere.
  Range source_azimuth{-90.0, 90.0};
  Range source_height{0.6, 2.0};
  Range noise_height{0.4, 3.0};
  Range array_height{0.8, 1.5};
  double snr_mean_db = 10.0;
  double snr_std_db = 3.3;
  Range snr_db{0.0, 20.0};
  bool add_noise = true;
  int mics = 2;
  double spacing_m = 0.04;
  int min_words = 2;
  int max_words = 8;
  double word_duration_s = 0.2;
  Range word_gap_s{0.02, 0.08};
  double lead_silence_s = 0.1;

  void validate() const;
};

struct UtteranceRecord {
  std::string id;
  std::string path;  // relative to the manifest's directory
  std::string transcript;
  double azimuth_deg = 0.0;
  double snr_db = 0.0;
  double rt60_s = 0.0;
  double spacing_m = 0.0;
  std::string split;
};

// Everything about one simulated utterance except the audio.
struct SceneDraw {
  RoomConfig room;
  ArrayGeometry array;
  Vec3 source;
  Vec3 noise;
  double azimuth_deg = 0.0;
  double snr_db = 0.0;
  double source_distance = 0.0;
  std::vector<int> words;
};

// Random stream for utterance `index` of a split; independent of any other
// utterance so generation order does not matter.
std::mt19937_64 utterance_rng(std::uint64_t seed, const std::string& split, std::uint64_t index);

// Truncated normal on spec.snr_db by rejection.
double sample_snr_db(const DatasetSpec& spec, std::mt19937_64& rng);

SceneDraw draw_scene(const DatasetSpec& spec, int lexicon_size, std::mt19937_64& rng);

// Renders one utterance: clean word sequence, RIRs, mixing and peak
// normalisation to 0.5 full scale.
signal::MultichannelWaveform render_scene(const DatasetSpec& spec, const SceneDraw& scene,
                                          const std::vector<WordSignature>& lexicon,
                                          std::mt19937_64& rng);

// Generates n_utts utterances into out_dir/<split>/ and returns the records in
// index order. Output is a function of (spec, lexicon, seed, split) only.
std::vector<UtteranceRecord> generate_dataset(const DatasetSpec& spec,
                                              const std::vector<WordSignature>& lexicon,
                                              int n_utts, std::uint64_t seed,
                                              const std::filesystem::path& out_dir,
                                              const std::string& split);

// JSON-lines manifest: path, transcript, azimuth_deg, snr_db, rt60_s,
// spacing_m, split (plus id).
void write_manifest(const std::filesystem::path& path, const std::vector<UtteranceRecord>& records);
std::vector<UtteranceRecord> read_manifest(const std::filesystem::path& path);

}  // namespace nbe2e::room
