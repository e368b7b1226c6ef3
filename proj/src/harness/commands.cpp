#include "nbe2e/harness/commands.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>

#include "nbe2e/train/checkpoint.hpp"
#include "nbe2e/train/trainer.hpp"

namespace nbe2e::harness {
namespace {

std::vector<SystemEntry> select(const ExperimentConfig& c, const std::vector<std::string>& names) {
  if (names.empty()) return c.systems;
  std::vector<SystemEntry> out;
  for (const auto& n : names) out.push_back(c.system(n));
  return out;
}

bool manifest_ready(const std::filesystem::path& m, int expected) {
  if (!std::filesystem::exists(m)) return false;
  try {
    return static_cast<int>(room::read_manifest(m).size()) == expected;
  } catch (const std::exception&) {
    return false;
  }
}

void generate_split(const DatasetConfig& d, const room::DatasetSpec& spec, const std::filesystem::path& dir,
                    const std::string& split, int n, bool force) {
  if (n <= 0) return;
  if (!force && manifest_ready(dir / (split + ".jsonl"), n)) {
    std::fprintf(stderr, "[generate] %s/%s: up to date\n", d.name.c_str(), split.c_str());
    return;
  }
  std::fprintf(stderr, "[generate] %s/%s: %d utterances\n", d.name.c_str(), split.c_str(), n);
  room::generate_dataset(spec, room::default_lexicon(), n, d.seed, dir, split);
}

double percent(const asr::WerCounts& w) { return 100.0 * w.wer(); }

}  // namespace

asr::Vocabulary default_vocabulary() {
  std::vector<std::string> words;
  for (const auto& w : room::default_lexicon()) words.push_back(w.word);
  return asr::Vocabulary(words);
}

std::filesystem::path manifest_path(const ExperimentConfig& c, const std::string& dataset, const std::string& split) {
  return c.data_dir(dataset) / (split + ".jsonl");
}

std::string spacing_split(double spacing_m) {
  char buf[48];
  std::snprintf(buf, sizeof(buf), "eval_spacing_%gcm", std::round(spacing_m * 1000.0) / 10.0);
  return buf;
}

void cmd_generate(const ExperimentConfig& c, bool spacing_sweep, bool force) {
  for (const auto& d : c.datasets) {
    const auto dir = c.data_dir(d.name);
    generate_split(d, d.spec, dir, "train", d.train, force);
    generate_split(d, d.spec, dir, "dev", d.dev, force);
    generate_split(d, d.spec, dir, "eval", d.eval, force);
  }
  if (spacing_sweep) {
    const auto& d = c.dataset(c.eval.spacing_dataset);
    for (double s : c.eval.spacings_m) {
      auto spec = d.spec;
      spec.spacing_m = s;
      generate_split(d, spec, c.data_dir(d.name), spacing_split(s), c.eval.spacing_utts, force);
    }
  }
}

train::InputOptions input_options(const ExperimentConfig& c, const SystemEntry& s) {
  train::InputOptions o;
  o.seed = c.seed;
  o.prior_perturb_deg = c.eval.prior_perturb_deg;
  if (s.frontend == "dsp") o.cache_dir = c.cache_dir(s.dataset);
  return o;
}

void cmd_train(const ExperimentConfig& c, const std::vector<std::string>& names, int resume_epoch, bool force) {
  const auto vocab = default_vocabulary();
  for (const auto& s : select(c, names)) {
    const auto run = c.run_dir(s.name);
    const auto last = train::checkpoint_dir(run) / (train::epoch_stem(c.training.epochs) + ".bin");
    if (!force && resume_epoch == 0 && std::filesystem::exists(last)) {
      std::fprintf(stderr, "[train] %s: already trained\n", s.name.c_str());
      continue;
    }
    const auto train_set = train::Corpus::load(manifest_path(c, s.dataset, "train"));
    const auto dev_path = manifest_path(c, s.dataset, "dev");
    std::optional<train::Corpus> dev;
    if (std::filesystem::exists(dev_path)) dev = train::Corpus::load(dev_path);

    train::Recognizer rec(c.system_config(s), vocab);
    const auto inputs = input_options(c, s);
    rec.initialize(c.seed, train_set, inputs);
    std::filesystem::create_directories(run);
    {
      std::ofstream info(run / "run.json");
      info << "{\"system\": \"" << s.name << "\", \"frontend\": \"" << s.frontend << "\", \"dataset\": \""
           << s.dataset << "\", \"lambda\": " << c.model.ctc_weight << ", \"seed\": " << c.seed
           << ", \"parameters\": " << rec.store().total_size() << "}\n";
    }
    std::fprintf(stderr, "[train] %s: %zu parameters, lambda %.2f\n", s.name.c_str(), rec.store().total_size(),
                 c.model.ctc_weight);
    auto opts = c.training;
    opts.seed = c.seed;
    opts.max_len = c.eval.max_len;
    train::Trainer trainer(rec, train_set, dev ? &*dev : nullptr, opts, inputs, run);
    trainer.run(resume_epoch);
  }
}

train::Recognizer load_system(const ExperimentConfig& c, const SystemEntry& s, std::optional<int> epoch) {
  train::Recognizer rec(c.system_config(s), default_vocabulary());
  const int e = epoch.value_or(c.training.epochs);
  train::load_params(train::checkpoint_dir(c.run_dir(s.name)), train::epoch_stem(e), rec.store());
  return rec;
}

ResultsTable cmd_eval(const ExperimentConfig& c, const std::vector<std::string>& names, std::optional<int> epoch) {
  ResultsTable t;
  t.columns = {"eval_wer"};
  const auto dir = c.results_dir();
  std::filesystem::create_directories(dir);
  for (const auto& s : select(c, names)) {
    const auto rec = load_system(c, s, epoch);
    const auto corpus = train::Corpus::load(manifest_path(c, s.dataset, "eval"));
    const auto r = train::evaluate(rec, corpus, input_options(c, s), c.eval.beam, c.eval.max_len);
    std::ofstream hyp(dir / (s.name + "_eval.hyp"));
    for (const auto& u : r.utterances) hyp << u.id << '\t' << u.hypothesis << '\n';
    std::fprintf(stderr, "[eval] %s on %s: WER %.2f%% (S %d I %d D %d / N %d)\n", s.name.c_str(), s.dataset.c_str(),
                 percent(r.counts), r.counts.substitutions, r.counts.insertions, r.counts.deletions,
                 r.counts.reference_length);
    t.add_row(s.name, {percent(r.counts)});
  }
  t.write(dir / "eval");
  return t;
}

ResultsTable cmd_doa_sweep(const ExperimentConfig& c, const std::vector<std::string>& names) {
  std::vector<SystemEntry> systems;
  if (names.empty()) {
    for (const auto& s : c.systems)
      if (s.dataset == c.eval.spacing_dataset && s.frontend.rfind("dir_", 0) != 0) systems.push_back(s);
  } else {
    systems = select(c, names);
  }
  ResultsTable t;
  t.corner = "system";
  for (double r : c.eval.doa_error_rates) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "doa_err_%g", r);
    t.columns.push_back(buf);
  }
  for (const auto& s : systems) {
    const auto rec = load_system(c, s);
    const auto corpus = train::Corpus::load(manifest_path(c, s.dataset, "eval"));
    std::vector<double> row;
    for (double rate : c.eval.doa_error_rates) {
      auto inputs = input_options(c, s);
      inputs.doa_error_rate = rate;
      const auto r = train::evaluate(rec, corpus, inputs, c.eval.beam, c.eval.max_len);
      std::fprintf(stderr, "[doa-sweep] %s error rate %.2f: WER %.2f%%\n", s.name.c_str(), rate, percent(r.counts));
      row.push_back(percent(r.counts));
    }
    t.add_row(s.name, row);
  }
  t.write(c.results_dir() / "doa_sweep");
  return t;
}

ResultsTable cmd_spacing_sweep(const ExperimentConfig& c, const std::vector<std::string>& names) {
  std::vector<SystemEntry> systems;
  if (names.empty()) {
    for (const auto& s : c.systems)
      if (s.dataset == c.eval.spacing_dataset) systems.push_back(s);
  } else {
    systems = select(c, names);
  }
  ResultsTable t;
  for (double sp : c.eval.spacings_m) t.columns.push_back(spacing_split(sp).substr(13));
  for (const auto& s : systems) {
    const auto rec = load_system(c, s);
    std::vector<double> row;
    for (double sp : c.eval.spacings_m) {
      const auto split = spacing_split(sp);
      const auto path = manifest_path(c, c.eval.spacing_dataset, split);
      if (!std::filesystem::exists(path))
        throw std::runtime_error("missing " + path.string() + "; run generate --spacing-sweep first");
      const auto corpus = train::Corpus::load(path);
      auto inputs = input_options(c, s);
      const auto r = train::evaluate(rec, corpus, inputs, c.eval.beam, c.eval.max_len);
      std::fprintf(stderr, "[spacing-sweep] %s %s: WER %.2f%%\n", s.name.c_str(), split.c_str(), percent(r.counts));
      row.push_back(percent(r.counts));
    }
    t.add_row(s.name, row);
  }
  t.write(c.results_dir() / "spacing_sweep");
  return t;
}

}  // namespace nbe2e::harness
