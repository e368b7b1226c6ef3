#include "nbe2e/harness/config.hpp"

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

namespace nbe2e::harness {
namespace {

using nlohmann::json;

std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

// Walks one JSON object, remembering which keys were read so that leftovers
// can be reported as unknown.
class Fields {
 public:
  Fields(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) fail(path_, "expected an object");
  }

  [[noreturn]] static void fail(const std::string& path, const std::string& what) {
    throw ConfigError(path + ": " + what);
  }

  std::string at(const std::string& key) const { return path_ + "." + key; }

  const json* find(const std::string& key) {
    seen_.insert(key);
    auto it = j_.find(key);
    return it == j_.end() ? nullptr : &*it;
  }

  void get(const std::string& key, double& out) {
    if (auto* v = find(key)) {
      if (!v->is_number()) fail(at(key), "expected a number");
      out = v->get<double>();
      if (!std::isfinite(out)) fail(at(key), "expected a finite number");
    }
  }
  void get(const std::string& key, int& out) {
    if (auto* v = find(key)) {
      if (!v->is_number_integer()) fail(at(key), "expected an integer");
      out = v->get<int>();
    }
  }
  void get(const std::string& key, std::uint64_t& out) {
    if (auto* v = find(key)) {
      if (!v->is_number_integer() || v->get<long long>() < 0) fail(at(key), "expected a non-negative integer");
      out = v->get<std::uint64_t>();
    }
  }
  void get(const std::string& key, bool& out) {
    if (auto* v = find(key)) {
      if (!v->is_boolean()) fail(at(key), "expected true or false");
      out = v->get<bool>();
    }
  }
  void get(const std::string& key, std::string& out) {
    if (auto* v = find(key)) {
      if (!v->is_string()) fail(at(key), "expected a string");
      out = v->get<std::string>();
    }
  }
  void get(const std::string& key, room::Range& out) {
    if (auto* v = find(key)) {
      if (!v->is_array() || v->size() != 2 || !(*v)[0].is_number() || !(*v)[1].is_number())
        fail(at(key), "expected [lo, hi]");
      out = {(*v)[0].get<double>(), (*v)[1].get<double>()};
      if (!(out.lo <= out.hi)) fail(at(key), "lo must not exceed hi");
    }
  }
  void get(const std::string& key, std::vector<double>& out) {
    if (auto* v = find(key)) {
      if (!v->is_array() || v->empty()) fail(at(key), "expected a non-empty array of numbers");
      out.clear();
      for (std::size_t i = 0; i < v->size(); ++i) {
        if (!(*v)[i].is_number()) fail(at(key) + "[" + std::to_string(i) + "]", "expected a number");
        out.push_back((*v)[i].get<double>());
      }
    }
  }

  void done() const {
    for (auto it = j_.begin(); it != j_.end(); ++it)
      if (!seen_.count(it.key())) fail(at(it.key()), "unknown key");
  }

 private:
  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

void require(bool ok, const std::string& path, const std::string& what) {
  if (!ok) Fields::fail(path, what);
}

void read_dataset(const json& j, const std::string& path, DatasetConfig& d) {
  Fields f(j, path);
  auto& s = d.spec;
  f.get("train", d.train);
  f.get("dev", d.dev);
  const bool has_eval = j.contains("eval");
  f.get("eval", d.eval);
  if (!has_eval) d.eval = std::max(1, static_cast<int>(std::lround(0.01 * d.train)));
  f.get("seed", d.seed);
  f.get("sample_rate", s.sample_rate);
  f.get("speed_of_sound", s.speed_of_sound);
  f.get("room_x", s.room_x);
  f.get("room_y", s.room_y);
  f.get("room_z", s.room_z);
  f.get("rt60", s.rt60);
  f.get("distance", s.distance);
  f.get("source_azimuth", s.source_azimuth);
  f.get("source_height", s.source_height);
  f.get("noise_height", s.noise_height);
  f.get("array_height", s.array_height);
  f.get("snr_mean_db", s.snr_mean_db);
  f.get("snr_std_db", s.snr_std_db);
  f.get("snr_db", s.snr_db);
  f.get("add_noise", s.add_noise);
  f.get("mics", s.mics);
  f.get("spacing_m", s.spacing_m);
  f.get("min_words", s.min_words);
  f.get("max_words", s.max_words);
  f.get("word_duration_s", s.word_duration_s);
  f.get("word_gap_s", s.word_gap_s);
  f.get("lead_silence_s", s.lead_silence_s);
  f.done();
  require(d.train >= 1, f.at("train"), "must be at least 1");
  require(d.dev >= 0, f.at("dev"), "must be non-negative");
  require(d.eval >= 1, f.at("eval"), "must be at least 1");
  require(s.mics >= 2, f.at("mics"), "multichannel experiments need at least 2 microphones");
  require(s.rt60.lo >= 0.01, f.at("rt60"), "must be at least 0.01 s");
  try {
    s.validate();
  } catch (const std::exception& e) {
    Fields::fail(path, e.what());
  }
}

}  // namespace

const DatasetConfig& ExperimentConfig::dataset(const std::string& name) const {
  for (const auto& d : datasets)
    if (d.name == name) return d;
  throw ConfigError("$.datasets: no dataset named '" + name + "'");
}

const SystemEntry& ExperimentConfig::system(const std::string& name) const {
  for (const auto& s : systems)
    if (s.name == name) return s;
  throw ConfigError("$.systems: no system named '" + name + "'");
}

train::SystemConfig ExperimentConfig::system_config(const SystemEntry& entry) const {
  train::SystemConfig c;
  c.name = entry.name;
  c.asr = model;
  c.dsp.stft = stft;
  const auto& d = dataset(entry.dataset);
  c.dsp.speed_of_sound = d.spec.speed_of_sound;
  if (entry.frontend == "dsp") {
    c.kind = train::FrontendKind::kDsp;
  } else {
    c.kind = train::FrontendKind::kNeural;
    c.frontend = frontend;
    c.frontend.stft = stft;
    c.frontend.mode = frontend::parse_frontend_mode(entry.frontend);
    c.frontend.channels = d.spec.mics;
    c.frontend.sample_rate = d.spec.sample_rate;
    c.frontend.speed_of_sound = d.spec.speed_of_sound;
    c.frontend.init_spacing_m = d.spec.spacing_m;
  }
  return c;
}

std::filesystem::path ExperimentConfig::data_dir(const std::string& name) const { return output_dir / "data" / name; }
std::filesystem::path ExperimentConfig::run_dir(const std::string& name) const { return output_dir / "runs" / name; }
std::filesystem::path ExperimentConfig::results_dir() const { return output_dir / "results"; }
std::filesystem::path ExperimentConfig::cache_dir(const std::string& dataset) const {
  return output_dir / "cache" / dataset;
}

ExperimentConfig default_config() {
  ExperimentConfig c;
  DatasetConfig main;
  main.name = "main";
  main.eval = 20;
  DatasetConfig prior = main;
  prior.name = "prior";
  prior.spec.add_noise = false;
  c.datasets = {main, prior};
  c.systems = {
      {"DSPE2E", "dsp", "main"},
      {"NBE2E-max", "max", "main"},
      {"NBE2E-attention", "attention", "main"},
      {"NBE2E-projection", "projection", "main"},
      {"NBE2E-prior-baseline", "projection", "prior"},
      {"NBE2E-dir-aware", "dir_aware", "prior"},
      {"NBE2E-dir-attentive", "dir_attentive", "prior"},
  };
  for (auto& d : c.datasets) d.seed = c.seed ^ fnv1a(d.name);
  return c;
}

ExperimentConfig parse_config(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("$: invalid JSON: ") + e.what());
  }
  ExperimentConfig c = default_config();
  Fields root(j, "$");
  root.get("seed", c.seed);
  std::string out = c.output_dir.string();
  root.get("output_dir", out);
  c.output_dir = out;

  for (auto& d : c.datasets) d.seed = 0;
  if (auto* ds = root.find("datasets")) {
    if (!ds->is_object()) Fields::fail("$.datasets", "expected an object keyed by dataset name");
    for (auto it = ds->begin(); it != ds->end(); ++it) {
      const std::string path = "$.datasets." + it.key();
      DatasetConfig* target = nullptr;
      for (auto& d : c.datasets)
        if (d.name == it.key()) target = &d;
      if (!target) {
        c.datasets.push_back(DatasetConfig{});
        target = &c.datasets.back();
        target->name = it.key();
      }
      read_dataset(it.value(), path, *target);
    }
  }
  for (auto& d : c.datasets)
    if (d.seed == 0) d.seed = c.seed ^ fnv1a(d.name);

  if (auto* s = root.find("stft")) {
    Fields f(*s, "$.stft");
    f.get("window_length", c.stft.window_length);
    f.get("hop", c.stft.hop);
    f.get("fft_size", c.stft.fft_size);
    std::string window = signal::window_name(c.stft.window);
    f.get("window", window);
    f.done();
    try {
      c.stft.window = signal::parse_window(window);
    } catch (const std::exception&) {
      Fields::fail("$.stft.window", "unknown window '" + window + "'");
    }
    try {
      c.stft.validate();
    } catch (const std::exception& e) {
      Fields::fail("$.stft", e.what());
    }
  }

  if (auto* s = root.find("frontend")) {
    Fields f(*s, "$.frontend");
    auto& fe = c.frontend;
    f.get("directions", fe.directions);
    f.get("filters", fe.filters);
    f.get("output_dim", fe.output_dim);
    f.get("angle_bins", fe.angle_bins);
    f.get("embedding_dim", fe.embedding_dim);
    f.get("attention_dim", fe.attention_dim);
    f.get("eps", fe.eps);
    f.get("init_noise", fe.init_noise);
    f.done();
    require(fe.directions >= 1, "$.frontend.directions", "must be at least 1");
    require(fe.filters >= 1, "$.frontend.filters", "must be at least 1");
    require(fe.output_dim >= 1, "$.frontend.output_dim", "must be at least 1");
    require(fe.angle_bins >= 1, "$.frontend.angle_bins", "must be at least 1");
    require(fe.embedding_dim >= 1, "$.frontend.embedding_dim", "must be at least 1");
    require(fe.attention_dim >= 1, "$.frontend.attention_dim", "must be at least 1");
    require(fe.eps > 0.0, "$.frontend.eps", "must be positive");
    require(fe.init_noise >= 0.0, "$.frontend.init_noise", "must be non-negative");
  }

  if (auto* s = root.find("model")) {
    Fields f(*s, "$.model");
    auto& m = c.model;
    int dim = m.encoder.model_dim, heads = m.encoder.heads, ff = m.encoder.ff_dim;
    f.get("model_dim", dim);
    f.get("heads", heads);
    f.get("ff_dim", ff);
    f.get("encoder_blocks", m.encoder.blocks);
    f.get("decoder_blocks", m.decoder.blocks);
    f.get("subsampling", m.encoder.subsampling);
    f.get("ctc_weight", m.ctc_weight);
    f.done();
    require(dim >= 1 && heads >= 1 && dim % heads == 0, "$.model.heads", "model_dim must be divisible by heads");
    require(ff >= 1, "$.model.ff_dim", "must be at least 1");
    require(m.encoder.blocks >= 0, "$.model.encoder_blocks", "must be non-negative");
    require(m.decoder.blocks >= 0, "$.model.decoder_blocks", "must be non-negative");
    require(m.encoder.subsampling >= 1, "$.model.subsampling", "must be at least 1");
    require(m.ctc_weight >= 0.0 && m.ctc_weight <= 1.0, "$.model.ctc_weight", "must lie in [0, 1]");
    m.encoder.model_dim = m.decoder.model_dim = dim;
    m.encoder.heads = m.decoder.heads = heads;
    m.encoder.ff_dim = m.decoder.ff_dim = ff;
  }

  if (auto* s = root.find("training")) {
    Fields f(*s, "$.training");
    auto& t = c.training;
    f.get("epochs", t.epochs);
    f.get("batch_size", t.batch_size);
    f.get("peak_lr", t.schedule.peak_lr);
    int warmup = static_cast<int>(t.schedule.warmup_steps);
    f.get("warmup_steps", warmup);
    t.schedule.warmup_steps = warmup;
    f.get("clip_norm", t.clip_norm);
    f.get("beta1", t.adam.beta1);
    f.get("beta2", t.adam.beta2);
    f.get("adam_eps", t.adam.eps);
    f.get("dev_beam", t.dev_beam);
    f.get("dev_limit", t.dev_limit);
    f.done();
    require(t.epochs >= 1, "$.training.epochs", "must be at least 1");
    require(t.batch_size >= 1, "$.training.batch_size", "must be at least 1");
    require(t.schedule.peak_lr > 0.0, "$.training.peak_lr", "must be positive");
    require(warmup >= 1, "$.training.warmup_steps", "must be at least 1");
    require(t.clip_norm > 0.0, "$.training.clip_norm", "must be positive");
    require(t.adam.beta1 >= 0.0 && t.adam.beta1 < 1.0, "$.training.beta1", "must lie in [0, 1)");
    require(t.adam.beta2 >= 0.0 && t.adam.beta2 < 1.0, "$.training.beta2", "must lie in [0, 1)");
    require(t.adam.eps > 0.0, "$.training.adam_eps", "must be positive");
    require(t.dev_beam >= 1, "$.training.dev_beam", "must be at least 1");
    require(t.dev_limit >= 0, "$.training.dev_limit", "must be non-negative");
  }

  if (auto* s = root.find("systems")) {
    if (!s->is_array() || s->empty()) Fields::fail("$.systems", "expected a non-empty array");
    c.systems.clear();
    std::set<std::string> names;
    for (std::size_t i = 0; i < s->size(); ++i) {
      const std::string path = "$.systems[" + std::to_string(i) + "]";
      Fields f((*s)[i], path);
      SystemEntry e;
      f.get("name", e.name);
      f.get("frontend", e.frontend);
      f.get("dataset", e.dataset);
      f.done();
      require(!e.name.empty(), f.at("name"), "required");
      require(names.insert(e.name).second, f.at("name"), "duplicate system name '" + e.name + "'");
      if (e.frontend != "dsp") {
        try {
          frontend::parse_frontend_mode(e.frontend);
        } catch (const std::exception&) {
          Fields::fail(f.at("frontend"),
                       "expected one of dsp, max, projection, attention, dir_aware, dir_attentive");
        }
      }
      c.systems.push_back(e);
    }
  }

  if (auto* s = root.find("eval")) {
    Fields f(*s, "$.eval");
    auto& e = c.eval;
    f.get("beam", e.beam);
    f.get("max_len", e.max_len);
    f.get("doa_error_rates", e.doa_error_rates);
    f.get("spacings_m", e.spacings_m);
    f.get("spacing_dataset", e.spacing_dataset);
    f.get("spacing_utts", e.spacing_utts);
    f.get("prior_perturb_deg", e.prior_perturb_deg);
    f.done();
    require(e.beam >= 1, "$.eval.beam", "must be at least 1");
    require(e.max_len >= 1, "$.eval.max_len", "must be at least 1");
    for (std::size_t i = 0; i < e.doa_error_rates.size(); ++i)
      require(e.doa_error_rates[i] >= 0.0 && e.doa_error_rates[i] <= 1.0,
              "$.eval.doa_error_rates[" + std::to_string(i) + "]", "must lie in [0, 1]");
    for (std::size_t i = 0; i < e.spacings_m.size(); ++i)
      require(e.spacings_m[i] > 0.0, "$.eval.spacings_m[" + std::to_string(i) + "]", "must be positive");
    require(e.spacing_utts >= 1, "$.eval.spacing_utts", "must be at least 1");
    require(e.prior_perturb_deg >= 0.0, "$.eval.prior_perturb_deg", "must be non-negative");
  }
  root.done();

  for (std::size_t i = 0; i < c.systems.size(); ++i) {
    bool found = false;
    for (const auto& d : c.datasets) found |= d.name == c.systems[i].dataset;
    require(found, "$.systems[" + std::to_string(i) + "].dataset",
            "no dataset named '" + c.systems[i].dataset + "'");
  }
  return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("$: cannot read config file " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

void apply_environment(ExperimentConfig& config) {
  if (const char* dir = std::getenv("NBE2E_OUT_DIR"); dir && *dir) config.output_dir = dir;
}

}  // namespace nbe2e::harness
