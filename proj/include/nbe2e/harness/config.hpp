#pragma once

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include "nbe2e/room/dataset.hpp"
#include "nbe2e/train/system.hpp"
#include "nbe2e/train/trainer.hpp"

namespace nbe2e::harness {

// Raised for malformed or invalid configuration; the message starts with the
// offending field path, e.g. "$.training.epochs: expected an integer".
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct DatasetConfig {
  std::string name;
  room::DatasetSpec spec;
  int train = 2000;
  int dev = 100;
  int eval = 20;  // about 1% of train unless given
  std::uint64_t seed = 0;
};

struct SystemEntry {
  std::string name;
  std::string frontend;  // dsp | max | projection | attention | dir_aware | dir_attentive
  std::string dataset;
};

struct EvalConfig {
  int beam = 4;
  int max_len = 12;
  std::vector<double> doa_error_rates{0.0, 0.25, 0.5, 0.75, 1.0};
  std::vector<double> spacings_m{0.04, 0.06, 0.08, 0.10};
  std::string spacing_dataset = "main";
  int spacing_utts = 200;
  double prior_perturb_deg = 10.0;
};

struct ExperimentConfig {
  std::uint64_t seed = 1;
  std::filesystem::path output_dir = "runs/default";
  std::vector<DatasetConfig> datasets;
  signal::StftConfig stft;
  frontend::FrontendConfig frontend;  // mode is set per system
  asr::AsrConfig model;
  train::TrainOptions training;
  std::vector<SystemEntry> systems;
  EvalConfig eval;

  const DatasetConfig& dataset(const std::string& name) const;
  const SystemEntry& system(const std::string& name) const;
  train::SystemConfig system_config(const SystemEntry& entry) const;
  // Directory layout under output_dir.
  std::filesystem::path data_dir(const std::string& dataset) const;
  std::filesystem::path run_dir(const std::string& system) const;
  std::filesystem::path results_dir() const;
  std::filesystem::path cache_dir(const std::string& dataset) const;
};

// Defaults: a "main" noisy dataset, a "prior" noise-free dataset and the
// seven systems of the comparison tables.
ExperimentConfig default_config();

// Every key is optional and overrides the default; unknown keys are
// rejected. Throws ConfigError.
ExperimentConfig parse_config(const std::string& json_text);
ExperimentConfig load_config(const std::filesystem::path& path);

// Applies the NBE2E_OUT_DIR override when set.
void apply_environment(ExperimentConfig& config);

}  // namespace nbe2e::harness
