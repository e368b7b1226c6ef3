#pragma once

#include <optional>
#include <string>
#include <vector>

#include "nbe2e/harness/config.hpp"
#include "nbe2e/harness/table.hpp"
#include "nbe2e/train/system.hpp"

namespace nbe2e::harness {

asr::Vocabulary default_vocabulary();

// Manifest of one split of a dataset.
std::filesystem::path manifest_path(const ExperimentConfig& c, const std::string& dataset, const std::string& split);
// "eval_spacing_4cm" style split names of the spacing sweep.
std::string spacing_split(double spacing_m);

// Writes train/dev/eval for every dataset; with spacing_sweep also one eval
// set per configured spacing. Splits whose manifest already exists with the
// expected size are kept unless force is set.
void cmd_generate(const ExperimentConfig& c, bool spacing_sweep, bool force);

// Input preparation shared by training and evaluation. Baseline features of
// all splits share one cache per dataset (utterance ids are split-prefixed).
train::InputOptions input_options(const ExperimentConfig& c, const SystemEntry& s);

// Trains the named systems (all when empty). resume_epoch > 0 continues from
// that epoch's checkpoint; systems whose final checkpoint exists are skipped
// unless force is set.
void cmd_train(const ExperimentConfig& c, const std::vector<std::string>& systems, int resume_epoch, bool force);

// Recognizer restored from a run's checkpoint (the last epoch by default).
train::Recognizer load_system(const ExperimentConfig& c, const SystemEntry& s, std::optional<int> epoch = {});

// Eval-split WER of each system on its own dataset. Writes results/eval.{csv,md}
// and one "id<TAB>hypothesis" file per system.
ResultsTable cmd_eval(const ExperimentConfig& c, const std::vector<std::string>& systems,
                      std::optional<int> epoch = {});

// WER per injected DOA error rate on the eval split; systems default to those
// on the spacing dataset. Writes results/doa_sweep.{csv,md}.
ResultsTable cmd_doa_sweep(const ExperimentConfig& c, const std::vector<std::string>& systems);

// WER per array spacing on the sets written by generate --spacing-sweep.
// Writes results/spacing_sweep.{csv,md}.
ResultsTable cmd_spacing_sweep(const ExperimentConfig& c, const std::vector<std::string>& systems);

}  // namespace nbe2e::harness
