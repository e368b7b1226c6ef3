#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "nbe2e/asr/decode.hpp"
#include "nbe2e/asr/model.hpp"
#include "nbe2e/asr/vocab.hpp"
#include "nbe2e/dsp/fbank.hpp"
#include "nbe2e/frontend/frontend.hpp"
#include "nbe2e/room/dataset.hpp"
#include "nbe2e/train/param_store.hpp"

// A complete recognizer: either the delay-and-sum baseline (fixed features)
// or the neural frontend, followed by a fixed feature normaliser and the
// CTC/attention model, all sharing one ParamStore.
namespace nbe2e::train {

enum class FrontendKind { kDsp, kNeural };

struct SystemConfig {
  std::string name;
  FrontendKind kind = FrontendKind::kNeural;
  frontend::FrontendConfig frontend;
  dsp::DspFrontendOptions dsp;
  asr::AsrConfig asr;
};

// A manifest plus the directory its paths are relative to.
struct Corpus {
  std::filesystem::path manifest;
  std::vector<room::UtteranceRecord> records;

  static Corpus load(const std::filesystem::path& manifest);
  std::filesystem::path wav_path(int index) const;
  int size() const { return static_cast<int>(records.size()); }
};

// How inputs are prepared for one pass over a corpus.
struct InputOptions {
  std::uint64_t seed = 0;
  // Baseline only: probability of steering at a wrong bank direction.
  double doa_error_rate = 0.0;
  // Direction modes only: oracle azimuth plus U(-d, d) degrees.
  double prior_perturb_deg = 10.0;
  // Baseline feature cache; empty disables caching.
  std::filesystem::path cache_dir;
};

struct Utterance {
  std::string id;
  std::vector<int> words;
  Mat features;                       // baseline
  signal::MultichannelWaveform wave;  // neural
  std::optional<double> azimuth_deg;
};

class Recognizer {
 public:
  Recognizer(SystemConfig config, const asr::Vocabulary& vocab);

  const SystemConfig& config() const { return config_; }
  const asr::Vocabulary& vocab() const { return vocab_; }
  bool neural() const { return config_.kind == FrontendKind::kNeural; }
  const frontend::NeuralFrontend* frontend() const { return frontend_ ? &*frontend_ : nullptr; }
  const asr::AsrModel& model() const { return model_; }

  ParamStore& store() { return store_; }
  const ParamStore& store() const { return store_; }

  // Random parameters, then the normaliser statistics from up to
  // `calibration` utterances of the corpus (input features at the initial
  // parameters).
  void initialize(std::uint64_t seed, const Corpus& corpus, const InputOptions& inputs, int calibration = 200);

  Utterance load(const Corpus& corpus, int index, const InputOptions& inputs) const;

  // Normalised features fed to the recognizer.
  Mat features(const Utterance& u) const;

  // Joint loss; accumulates parameter gradients into grads when given.
  asr::LossBreakdown loss(const Utterance& u, Gradients* grads) const;

  asr::Hypothesis decode(const Utterance& u, const asr::BeamOptions& options) const;
  asr::BeamOptions beam_options(int beam, int max_len) const;

 private:
  SystemConfig config_;
  asr::Vocabulary vocab_;
  ParamStore store_;
  std::optional<frontend::NeuralFrontend> frontend_;
  ParamId norm_mean_ = -1, norm_inv_std_ = -1;
  asr::AsrModel model_;
};

}  // namespace nbe2e::train
