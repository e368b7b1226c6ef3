// Command-line entry point. Exit codes: 0 success, 2 configuration error,
// 3 verification failure, 1 anything else.
#include <cstdio>
#include <exception>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "nbe2e/harness/commands.hpp"
#include "nbe2e/harness/config.hpp"
#include "nbe2e/harness/gradcheck.hpp"

namespace {

constexpr int kConfigError = 2;
constexpr int kVerificationFailure = 3;

nbe2e::harness::ExperimentConfig load(const std::string& path) {
  auto c = nbe2e::harness::load_config(path);
  nbe2e::harness::apply_environment(c);
  return c;
}

int gradcheck(const std::string& op, const std::string& canary, double tolerance) {
  const auto results = nbe2e::harness::run_gradchecks(op, canary, tolerance);
  bool ok = true;
  for (const auto& r : results) {
    std::printf("%-28s max_rel_err %.3e  %s\n", r.op.c_str(), r.report.max_error(), r.passed ? "PASS" : "FAIL");
    for (const auto& e : r.report.entries)
      std::printf("    %-36s %.3e (%d coords)\n", e.block.c_str(), e.max_rel_error, e.coords_checked);
    ok &= r.passed;
  }
  if (!ok) {
    for (const auto& r : results)
      if (!r.passed) std::fprintf(stderr, "gradcheck failed: %s\n", r.op.c_str());
    return kVerificationFailure;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Neural beamforming end-to-end ASR experiments on simulated rooms"};
  app.require_subcommand(1);
  app.footer("NBE2E_OUT_DIR overrides output_dir from the config.");

  std::string config;
  std::vector<std::string> systems;
  bool spacing = false, force = false;
  int resume = 0;
  std::optional<int> epoch;
  std::string op = "all", canary;
  double tolerance = 1e-4;

  auto* gen = app.add_subcommand("generate", "Simulate the train/dev/eval sets");
  gen->add_option("config", config, "Experiment config (JSON)")->required()->check(CLI::ExistingFile);
  gen->add_flag("--spacing-sweep", spacing, "Also write one eval set per array spacing");
  gen->add_flag("--force", force, "Regenerate splits that already exist");

  auto* tr = app.add_subcommand("train", "Train systems");
  tr->add_option("config", config, "Experiment config (JSON)")->required()->check(CLI::ExistingFile);
  tr->add_option("--system", systems, "System name (repeatable; default all)");
  tr->add_option("--resume", resume, "Continue from this epoch's checkpoint")->check(CLI::NonNegativeNumber);
  tr->add_flag("--force", force, "Retrain systems that already finished");

  auto* ev = app.add_subcommand("eval", "Decode each system's eval split");
  ev->add_option("config", config, "Experiment config (JSON)")->required()->check(CLI::ExistingFile);
  ev->add_option("--system", systems, "System name (repeatable; default all)");
  ev->add_option("--epoch", epoch, "Checkpoint epoch (default: last)");

  auto* doa = app.add_subcommand("doa-sweep", "WER against injected DOA error rate");
  doa->add_option("config", config, "Experiment config (JSON)")->required()->check(CLI::ExistingFile);
  doa->add_option("--system", systems, "System name (repeatable)");

  auto* sp = app.add_subcommand("spacing-sweep", "WER against microphone spacing");
  sp->add_option("config", config, "Experiment config (JSON)")->required()->check(CLI::ExistingFile);
  sp->add_option("--system", systems, "System name (repeatable)");

  auto* gc = app.add_subcommand("gradcheck", "Finite-difference check of every differentiable op");
  gc->add_option("--op", op, "Op name or 'all'");
  gc->add_option("--canary", canary, "Sign-flip this op's gradient; the check must then fail");
  gc->add_option("--tolerance", tolerance, "Maximum relative error")->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kConfigError;
  }

  try {
    using namespace nbe2e::harness;
    if (*gc) return gradcheck(op, canary, tolerance);
    const auto c = load(config);
    if (*gen) cmd_generate(c, spacing, force);
    if (*tr) cmd_train(c, systems, resume, force);
    if (*ev) std::cout << cmd_eval(c, systems, epoch).to_markdown();
    if (*doa) std::cout << cmd_doa_sweep(c, systems).to_markdown();
    if (*sp) std::cout << cmd_spacing_sweep(c, systems).to_markdown();
    return 0;
  } catch (const nbe2e::harness::ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return kConfigError;
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kConfigError;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
}
