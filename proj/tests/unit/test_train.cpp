#include <doctest.h>

#include <cmath>
#include <fstream>
#include <random>
#include <sstream>

#include "nbe2e/harness/commands.hpp"
#include "nbe2e/room/dataset.hpp"
#include "nbe2e/train/checkpoint.hpp"
#include "nbe2e/train/grad_check.hpp"
#include "nbe2e/train/optim.hpp"
#include "nbe2e/train/system.hpp"
#include "nbe2e/train/trainer.hpp"
#include "support.hpp"

using namespace nbe2e;
using namespace nbe2e::train;

namespace {

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// A dozen short utterances shared by the training tests.
struct TinyCorpus {
  std::filesystem::path dir;
  Corpus train, dev;
  TinyCorpus() {
    dir = testing::scratch_dir("train_corpus");
    room::DatasetSpec spec;
    spec.min_words = 1;
    spec.max_words = 2;
    spec.rt60 = {0.05, 0.15};
    const auto lex = room::default_lexicon();
    room::write_manifest(dir / "train.jsonl", room::generate_dataset(spec, lex, 12, 3, dir, "train"));
    room::write_manifest(dir / "dev.jsonl", room::generate_dataset(spec, lex, 3, 3, dir, "dev"));
    train = Corpus::load(dir / "train.jsonl");
    dev = Corpus::load(dir / "dev.jsonl");
  }
};

const TinyCorpus& corpus() {
  static const TinyCorpus c;
  return c;
}

SystemConfig tiny_system(FrontendKind kind) {
  SystemConfig s;
  s.name = kind == FrontendKind::kDsp ? "tiny-dsp" : "tiny-neural";
  s.kind = kind;
  s.frontend.directions = 2;
  s.frontend.filters = 8;
  s.frontend.output_dim = 8;
  s.dsp.num_filters = 8;
  s.asr.encoder.model_dim = s.asr.decoder.model_dim = 16;
  s.asr.encoder.heads = s.asr.decoder.heads = 2;
  s.asr.encoder.ff_dim = s.asr.decoder.ff_dim = 32;
  s.asr.encoder.blocks = 1;
  s.asr.decoder.blocks = 1;
  return s;
}

TrainOptions tiny_options(int epochs) {
  TrainOptions o;
  o.epochs = epochs;
  o.batch_size = 4;
  o.schedule.warmup_steps = 6;
  o.schedule.peak_lr = 3e-3;
  o.seed = 11;
  o.dev_beam = 2;
  return o;
}

std::vector<EpochMetrics> train_tiny(const std::filesystem::path& run, int epochs, int resume = 0,
                                     FrontendKind kind = FrontendKind::kDsp) {
  Recognizer rec(tiny_system(kind), harness::default_vocabulary());
  rec.initialize(5, corpus().train, {});
  Trainer t(rec, corpus().train, &corpus().dev, tiny_options(epochs), {}, run);
  return t.run(resume);
}

}  // namespace

TEST_CASE("learning-rate schedule") {
  const LrSchedule s;
  CHECK(s.peak_lr == 1e-3);
  CHECK(s.warmup_steps == 4000);
  CHECK(std::abs(s.lr_at(4000) - 1e-3) < 1e-9);
  // both branches meet at the warmup step
  const double w = 4000.0;
  CHECK(1.0 / std::sqrt(w) == doctest::Approx(w * std::pow(w, -1.5)).epsilon(1e-15));
  CHECK(std::abs(s.lr_at(4001) - s.lr_at(4000)) < 1e-3 * 1e-3);
  CHECK(std::abs(s.lr_at(3999) - s.lr_at(4000)) < 1e-3 * 1e-3);
  double peak = 0.0;
  for (std::int64_t step = 2; step <= 20000; ++step) {
    const double a = s.lr_at(step - 1), b = s.lr_at(step);
    if (step <= 4000) CHECK(b >= a);
    else CHECK(b <= a);
    CHECK(b > 0.0);
    peak = std::max(peak, b);
  }
  CHECK(std::abs(peak - 1e-3) < 1e-9);
  CHECK_THROWS_AS(s.lr_at(0), std::invalid_argument);
  CHECK_THROWS_AS((LrSchedule{1e-3, 0}.lr_at(1)), std::invalid_argument);
}

TEST_CASE("adam matches a scalar reference and keeps its fixed point") {
  ParamStore store;
  const auto a = store.add("a", {1});
  const auto b = store.add("b", {3});
  const auto c = store.add("c", {3});
  const auto frozen = store.add("frozen", {1}, false);
  store.value(a)[0] = 0.5;
  std::mt19937_64 rng(1);
  for (int i = 0; i < 3; ++i) store.value(b)[i] = store.value(c)[i] = 0.1 * (i + 1);
  store.value(frozen)[0] = 7.0;

  SUBCASE("zero gradients from a fresh state change nothing") {
    OptimizerState st(store);
    Gradients g(store);
    const auto before = store.block(a).value;
    adam_step(store, g, st, 1e-2);
    CHECK(store.block(a).value == before);
    CHECK(st.step == 1);
  }

  SUBCASE("zero gradients decay the moments") {
    OptimizerState st(store);
    Gradients g(store);
    g[a][0] = 2.0;
    adam_step(store, g, st, 1e-2);
    const double m1 = st.m[a][0], v1 = st.v[a][0];
    g.zero();
    adam_step(store, g, st, 1e-2);
    CHECK(st.m[a][0] == doctest::Approx(0.9 * m1).epsilon(1e-15));
    CHECK(st.v[a][0] == doctest::Approx(0.98 * v1).epsilon(1e-15));
  }

  SUBCASE("scalar closed form") {
    OptimizerState st(store);
    Gradients g(store);
    double p = 0.5, m = 0.0, v = 0.0;
    std::normal_distribution<double> n(0.0, 1.0);
    for (int t = 1; t <= 50; ++t) {
      const double grad = n(rng);
      g[a][0] = grad;
      adam_step(store, g, st, 1e-3);
      m = 0.9 * m + 0.1 * grad;
      v = 0.98 * v + 0.02 * grad * grad;
      p -= 1e-3 * (m / (1 - std::pow(0.9, t))) / (std::sqrt(v / (1 - std::pow(0.98, t))) + 1e-9);
      CHECK(store.value(a)[0] == doctest::Approx(p).epsilon(1e-13));
    }
  }

  SUBCASE("a constant gradient moves the parameter by lr per step") {
    OptimizerState st(store);
    Gradients g(store);
    g[a][0] = -0.3;
    double last = store.value(a)[0];
    for (int t = 1; t <= 200; ++t) {
      adam_step(store, g, st, 1e-3);
      const double step = store.value(a)[0] - last;
      last = store.value(a)[0];
      if (t > 100) CHECK(step == doctest::Approx(1e-3).epsilon(1e-6).scale(0));
    }
  }

  SUBCASE("identical blocks with identical gradients stay identical; frozen blocks never move") {
    OptimizerState st(store);
    Gradients g(store);
    std::normal_distribution<double> n(0.0, 1.0);
    for (int t = 0; t < 30; ++t) {
      for (int i = 0; i < 3; ++i) g[b][i] = g[c][i] = n(rng);
      g[frozen][0] = 1.0;
      adam_step(store, g, st, 1e-2);
    }
    CHECK(store.block(b).value == store.block(c).value);
    CHECK(store.value(frozen)[0] == 7.0);
  }

  SUBCASE("non-finite gradients are rejected before any update") {
    OptimizerState st(store);
    Gradients g(store);
    g[a][0] = 1.0;
    g[c][1] = std::nan("");
    const auto before = store.block(a).value;
    CHECK_THROWS_WITH(adam_step(store, g, st, 1e-2), "gradient blowup in c");
    CHECK(store.block(a).value == before);
    CHECK(st.step == 0);
  }
}

TEST_CASE("global norm clipping") {
  ParamStore store;
  const auto a = store.add("a", {2});
  Gradients g(store);
  g[a][0] = 3.0;
  g[a][1] = 4.0;
  CHECK(clip_global_norm(g, 10.0) == 5.0);
  CHECK(g[a][0] == 3.0);
  CHECK(clip_global_norm(g, 1.0) == 5.0);
  CHECK(std::hypot(g[a][0], g[a][1]) == doctest::Approx(1.0));
  CHECK(g[a][0] / g[a][1] == doctest::Approx(0.75));
}

TEST_CASE("gradient checker: exact on a linear map, flags a sign flip") {
  ParamStore store;
  const auto w = store.add("w", {3, 4});
  std::mt19937_64 rng(2);
  fill_normal(store.value(w), 1.0, rng);
  const Vec x = testing::random_mat(4, 1, rng).col(0);
  const Vec r = testing::random_mat(3, 1, rng).col(0);
  auto loss = [&](const ParamStore& s) { return r.dot(as_mat(s.value(w), 3, 4) * x); };
  auto grad = [&](const ParamStore&, Gradients& g) { as_mat(g[w], 3, 4) += r * x.transpose(); };
  const auto report = grad_check(store, loss, grad);
  REQUIRE(report.entries.size() == 1);
  CHECK(report.entries[0].block == "w");
  CHECK(report.entries[0].coords_checked == 12);
  CHECK(report.max_error() < 1e-9);

  auto flipped = [&](const ParamStore&, Gradients& g) { as_mat(g[w], 3, 4) -= r * x.transpose(); };
  CHECK(grad_check(store, loss, flipped).max_error() == doctest::Approx(2.0).epsilon(1e-6));
}

TEST_CASE("gradient checker samples large blocks") {
  ParamStore store;
  const auto w = store.add("w", {1000});
  std::mt19937_64 rng(3);
  fill_normal(store.value(w), 1.0, rng);
  auto loss = [&](const ParamStore& s) {
    double acc = 0.0;
    for (double v : s.value(w)) acc += std::exp(v);
    return acc;
  };
  auto grad = [&](const ParamStore& s, Gradients& g) {
    for (std::size_t i = 0; i < 1000; ++i) g[w][i] = std::exp(s.value(w)[i]);
  };
  const auto report = grad_check(store, loss, grad);
  CHECK(report.entries[0].coords_checked >= 200);
  CHECK(report.entries[0].coords_checked < 1000);
  CHECK(report.max_error() < 1e-6);
}

TEST_CASE("checkpoints round-trip bit for bit") {
  const auto dir = testing::scratch_dir("ckpt");
  Recognizer rec(tiny_system(FrontendKind::kNeural), harness::default_vocabulary());
  rec.initialize(9, corpus().train, {});
  save_params(dir, "p", rec.store());

  Recognizer back(tiny_system(FrontendKind::kNeural), harness::default_vocabulary());
  load_params(dir, "p", back.store());
  for (int id = 0; id < rec.store().size(); ++id) CHECK(rec.store().block(id).value == back.store().block(id).value);
  const auto u = rec.load(corpus().train, 0, {});
  const Mat fa = rec.features(u), fb = back.features(u);
  CHECK(fa.cwiseEqual(fb).all());
  CHECK(rec.loss(u, nullptr).theta == back.loss(u, nullptr).theta);

  save_params(dir, "q", back.store());
  CHECK(slurp(dir / "p.bin") == slurp(dir / "q.bin"));
  CHECK(slurp(dir / "p.idx") == slurp(dir / "q.idx"));

  SUBCASE("a store with other shapes is rejected") {
    auto other_cfg = tiny_system(FrontendKind::kNeural);
    other_cfg.asr.encoder.ff_dim = 24;
    other_cfg.asr.decoder.ff_dim = 24;
    Recognizer other(other_cfg, harness::default_vocabulary());
    CHECK_THROWS_AS(load_params(dir, "p", other.store()), std::runtime_error);
    Recognizer dsp(tiny_system(FrontendKind::kDsp), harness::default_vocabulary());
    CHECK_THROWS_AS(load_params(dir, "p", dsp.store()), std::runtime_error);
  }

  SUBCASE("optimizer state round trip") {
    OptimizerState st(rec.store());
    Gradients g(rec.store());
    rec.loss(u, &g);
    adam_step(rec.store(), g, st, 1e-3);
    adam_step(rec.store(), g, st, 1e-3);
    save_optimizer(dir, "o", rec.store(), st);
    OptimizerState loaded(rec.store());
    load_optimizer(dir, "o", rec.store(), loaded);
    CHECK(loaded.step == 2);
    CHECK(loaded.m == st.m);
    CHECK(loaded.v == st.v);
  }
}

TEST_CASE("one backward pass reaches the spatial filters") {
  Recognizer rec(tiny_system(FrontendKind::kNeural), harness::default_vocabulary());
  rec.initialize(4, corpus().train, {});
  Gradients g(rec.store());
  rec.loss(rec.load(corpus().train, 1, {}), &g);
  const auto h = rec.store().id("frontend.spatial");
  double norm = 0.0;
  int nonzero = 0;
  for (double v : g[h]) {
    norm += v * v;
    nonzero += v != 0.0;
  }
  CHECK(norm > 0.0);
  CHECK(nonzero > static_cast<int>(g[h].size()) / 2);
  CHECK(std::isfinite(norm));
}

TEST_CASE("training is deterministic, learns and resumes exactly") {
  const auto a = testing::scratch_dir("run_a"), b = testing::scratch_dir("run_b");
  const auto ma = train_tiny(a, 6);
  const auto mb = train_tiny(b, 6);
  REQUIRE(ma.size() == 6);
  CHECK(slurp(a / "metrics.csv") == slurp(b / "metrics.csv"));
  CHECK(slurp(checkpoint_dir(a) / "epoch_006.bin") == slurp(checkpoint_dir(b) / "epoch_006.bin"));

  CHECK(ma[4].theta < ma[0].theta);
  for (const auto& m : ma) {
    // the logged total is the 0.1 mix of the two task losses
    CHECK(m.theta == doctest::Approx(0.1 * m.theta_ctc + 0.9 * m.theta_att).epsilon(1e-12));
    CHECK(m.step == m.epoch * 3);
  }
  const auto logged = read_metrics(a / "metrics.csv");
  REQUIRE(logged.size() == 6);
  for (std::size_t i = 0; i < 6; ++i) CHECK(format_metrics(logged[i]) == format_metrics(ma[i]));

  // Resume b from epoch 3 and replay the rest.
  const auto resumed = train_tiny(b, 6, 3);
  REQUIRE(resumed.size() == 3);
  for (int i = 0; i < 3; ++i) CHECK(format_metrics(resumed[i]) == format_metrics(ma[3 + i]));
  CHECK(slurp(a / "metrics.csv") == slurp(b / "metrics.csv"));
  CHECK(slurp(checkpoint_dir(a) / "epoch_006.bin") == slurp(checkpoint_dir(b) / "epoch_006.bin"));
}

TEST_CASE("neural training is deterministic too") {
  const auto a = testing::scratch_dir("nrun_a"), b = testing::scratch_dir("nrun_b");
  const auto ma = train_tiny(a, 2, 0, FrontendKind::kNeural);
  const auto mb = train_tiny(b, 2, 0, FrontendKind::kNeural);
  CHECK(slurp(a / "metrics.csv") == slurp(b / "metrics.csv"));
  CHECK(slurp(checkpoint_dir(a) / "epoch_002.bin") == slurp(checkpoint_dir(b) / "epoch_002.bin"));
}

TEST_CASE("evaluation decodes in manifest order and counts words") {
  Recognizer rec(tiny_system(FrontendKind::kDsp), harness::default_vocabulary());
  rec.initialize(5, corpus().train, {});
  const auto r1 = evaluate(rec, corpus().dev, {}, 2, 12);
  const auto r2 = evaluate(rec, corpus().dev, {}, 2, 12);
  REQUIRE(r1.utterances.size() == 3);
  int words = 0;
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(r1.utterances[i].id == corpus().dev.records[i].id);
    CHECK(r1.utterances[i].hypothesis == r2.utterances[i].hypothesis);
    words += static_cast<int>(asr::split_words(corpus().dev.records[i].transcript).size());
  }
  CHECK(r1.counts.reference_length == words);
  CHECK(evaluate(rec, corpus().dev, {}, 2, 12, 1).utterances.size() == 1);
}
