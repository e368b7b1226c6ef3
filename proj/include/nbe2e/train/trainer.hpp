#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "nbe2e/asr/decode.hpp"
#include "nbe2e/train/optim.hpp"
#include "nbe2e/train/system.hpp"

namespace nbe2e::train {

struct TrainOptions {
  int epochs = 30;
  int batch_size = 8;
  LrSchedule schedule;
  AdamOptions adam;
  double clip_norm = 5.0;
  std::uint64_t seed = 0;
  int dev_beam = 4;
  int max_len = 12;
  int dev_limit = 0;  // 0: whole dev set
};

struct EpochMetrics {
  int epoch = 0;
  std::int64_t step = 0;
  double lr = 0.0;
  double theta = 0.0;
  double theta_ctc = 0.0;
  double theta_att = 0.0;
  double dev_wer = 0.0;
};

// "epoch,step,lr,theta,theta_ctc,theta_att,dev_wer" with round-trip precision.
std::string metrics_header();
std::string format_metrics(const EpochMetrics& m);
std::vector<EpochMetrics> read_metrics(const std::filesystem::path& csv);

std::filesystem::path checkpoint_dir(const std::filesystem::path& run_dir);
std::string epoch_stem(int epoch);  // "epoch_007"

struct DecodedUtterance {
  std::string id;
  std::string hypothesis;
  std::string reference;
};

struct EvalResult {
  asr::WerCounts counts;
  std::vector<DecodedUtterance> utterances;
};

// Decodes up to `limit` utterances (0: all) in manifest order. Parallel over
// utterances; the result does not depend on the thread count.
EvalResult evaluate(const Recognizer& rec, const Corpus& corpus, const InputOptions& inputs, int beam,
                    int max_len, int limit = 0);

// Mini-batch training with a fixed-order gradient reduction. Writes
// metrics.csv and per-epoch parameter and optimizer checkpoints under
// run_dir. The shuffle of epoch e depends only on (seed, e), so resuming from
// a checkpoint replays the unbroken run exactly.
class Trainer {
 public:
  Trainer(Recognizer& rec, const Corpus& train, const Corpus* dev, TrainOptions options, InputOptions inputs,
          std::filesystem::path run_dir);

  // Trains epochs resume_epoch+1 .. epochs. With resume_epoch > 0 the
  // parameters and optimizer state are first restored from that epoch's
  // checkpoint. Returns the metrics of the epochs run.
  std::vector<EpochMetrics> run(int resume_epoch = 0);

 private:
  EpochMetrics train_epoch(int epoch, OptimizerState& state);

  Recognizer& rec_;
  const Corpus& train_;
  const Corpus* dev_;
  TrainOptions options_;
  InputOptions inputs_;
  std::filesystem::path run_dir_;
};

}  // namespace nbe2e::train
