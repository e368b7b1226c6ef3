#include "nbe2e/train/trainer.hpp"

#include <algorithm>
#include <cstdio>
#include <exception>
#include <fstream>
#include <iostream>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "nbe2e/train/checkpoint.hpp"

namespace nbe2e::train {

std::string metrics_header() { return "epoch,step,lr,theta,theta_ctc,theta_att,dev_wer"; }

std::string format_metrics(const EpochMetrics& m) {
  char buf[256];
  std::snprintf(buf, sizeof(buf), "%d,%lld,%.17g,%.17g,%.17g,%.17g,%.17g", m.epoch, static_cast<long long>(m.step),
                m.lr, m.theta, m.theta_ctc, m.theta_att, m.dev_wer);
  return buf;
}

std::vector<EpochMetrics> read_metrics(const std::filesystem::path& csv) {
  std::ifstream in(csv);
  if (!in) throw std::runtime_error("cannot read " + csv.string());
  std::vector<EpochMetrics> out;
  std::string line;
  std::getline(in, line);
  if (line != metrics_header()) throw std::runtime_error("unexpected metrics header in " + csv.string());
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    EpochMetrics m;
    long long step = 0;
    if (std::sscanf(line.c_str(), "%d,%lld,%lf,%lf,%lf,%lf,%lf", &m.epoch, &step, &m.lr, &m.theta, &m.theta_ctc,
                    &m.theta_att, &m.dev_wer) != 7)
      throw std::runtime_error("malformed metrics line: " + line);
    m.step = step;
    out.push_back(m);
  }
  return out;
}

std::filesystem::path checkpoint_dir(const std::filesystem::path& run_dir) { return run_dir / "checkpoints"; }

std::string epoch_stem(int epoch) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "epoch_%03d", epoch);
  return buf;
}

EvalResult evaluate(const Recognizer& rec, const Corpus& corpus, const InputOptions& inputs, int beam,
                    int max_len, int limit) {
  const int n = limit > 0 ? std::min(limit, corpus.size()) : corpus.size();
  const auto opts = rec.beam_options(beam, max_len);
  EvalResult r;
  r.utterances.resize(n);
  std::vector<asr::WerCounts> counts(n);
  std::exception_ptr error;
#pragma omp parallel for schedule(dynamic)
  for (int i = 0; i < n; ++i) {
    try {
      const auto u = rec.load(corpus, i, inputs);
      const auto hyp = rec.decode(u, opts);
      auto& d = r.utterances[i];
      d.id = u.id;
      d.hypothesis = rec.vocab().decode(hyp.tokens);
      d.reference = corpus.records[i].transcript;
      counts[i] = asr::word_error_rate(asr::split_words(d.hypothesis), asr::split_words(d.reference));
    } catch (...) {
#pragma omp critical
      if (!error) error = std::current_exception();
    }
  }
  if (error) std::rethrow_exception(error);
  for (const auto& c : counts) r.counts += c;
  return r;
}

Trainer::Trainer(Recognizer& rec, const Corpus& train, const Corpus* dev, TrainOptions options,
                 InputOptions inputs, std::filesystem::path run_dir)
    : rec_(rec), train_(train), dev_(dev), options_(options), inputs_(std::move(inputs)),
      run_dir_(std::move(run_dir)) {
  if (options_.batch_size < 1 || options_.epochs < 1) throw std::invalid_argument("bad training options");
  if (train_.size() == 0) throw std::invalid_argument("empty training manifest");
}

std::vector<EpochMetrics> Trainer::run(int resume_epoch) {
  auto& store = rec_.store();
  OptimizerState state(store, options_.adam);
  const auto ckpt = checkpoint_dir(run_dir_);
  std::filesystem::create_directories(ckpt);
  const auto csv = run_dir_ / "metrics.csv";

  std::vector<EpochMetrics> kept;
  if (resume_epoch > 0) {
    load_params(ckpt, epoch_stem(resume_epoch), store);
    load_optimizer(ckpt, "optim_" + epoch_stem(resume_epoch).substr(6), store, state);
    for (const auto& m : read_metrics(csv))
      if (m.epoch <= resume_epoch) kept.push_back(m);
  }
  {
    std::ofstream out(csv, std::ios::trunc);
    out << metrics_header() << '\n';
    for (const auto& m : kept) out << format_metrics(m) << '\n';
  }

  std::vector<EpochMetrics> ran;
  for (int epoch = resume_epoch + 1; epoch <= options_.epochs; ++epoch) {
    auto m = train_epoch(epoch, state);
    if (dev_ && dev_->size() > 0)
      m.dev_wer = evaluate(rec_, *dev_, inputs_, options_.dev_beam, options_.max_len, options_.dev_limit).counts.wer();
    save_params(ckpt, epoch_stem(epoch), store);
    save_optimizer(ckpt, "optim_" + epoch_stem(epoch).substr(6), store, state);
    std::ofstream(csv, std::ios::app) << format_metrics(m) << '\n';
    std::fprintf(stderr, "[%s] epoch %d step %lld lr %.3g theta %.4f (ctc %.4f att %.4f) dev_wer %.4f\n",
                 rec_.config().name.c_str(), m.epoch, static_cast<long long>(m.step), m.lr, m.theta, m.theta_ctc,
                 m.theta_att, m.dev_wer);
    ran.push_back(m);
  }
  return ran;
}

EpochMetrics Trainer::train_epoch(int epoch, OptimizerState& state) {
  auto& store = rec_.store();
  const int n = train_.size(), B = options_.batch_size;
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  auto rng = room::utterance_rng(options_.seed, "shuffle", static_cast<std::uint64_t>(epoch));
  std::shuffle(order.begin(), order.end(), rng);

  std::vector<Gradients> local(B, Gradients(store));
  std::vector<asr::LossBreakdown> losses(B);
  Gradients total(store);
  EpochMetrics m;
  m.epoch = epoch;
  for (int start = 0; start < n; start += B) {
    const int count = std::min(B, n - start);
    std::exception_ptr error;
#pragma omp parallel for schedule(dynamic)
    for (int i = 0; i < count; ++i) {
      try {
        local[i].zero();
        losses[i] = rec_.loss(rec_.load(train_, order[start + i], inputs_), &local[i]);
      } catch (...) {
#pragma omp critical
        if (!error) error = std::current_exception();
      }
    }
    if (error) std::rethrow_exception(error);

    total.zero();
    for (int i = 0; i < count; ++i) {
      total.accumulate(local[i]);
      m.theta += losses[i].theta;
      m.theta_ctc += losses[i].ctc;
      m.theta_att += losses[i].att;
    }
    total.scale(1.0 / count);
    clip_global_norm(total, options_.clip_norm);
    m.lr = options_.schedule.lr_at(state.step + 1);
    adam_step(store, total, state, m.lr);
  }
  m.step = state.step;
  m.theta /= n;
  m.theta_ctc /= n;
  m.theta_att /= n;
  return m;
}

}  // namespace nbe2e::train
