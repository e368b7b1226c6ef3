#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "nbe2e/train/grad_check.hpp"

namespace nbe2e::harness {

// One differentiable operation on a small random instance. With corrupt set
// the analytic gradient is sign-flipped before comparison, which a working
// checker must flag.
struct GradCheckCase {
  std::string name;
  std::function<train::GradCheckReport(std::uint64_t seed, bool corrupt)> run;
};

// Every registered op, each exactly once, in a fixed order.
const std::vector<GradCheckCase>& gradcheck_registry();

struct OpResult {
  std::string op;
  train::GradCheckReport report;
  bool passed = false;
};

// scope is "all" or one op name; canary names an op whose gradient is
// corrupted (empty for none). Throws std::invalid_argument for unknown names.
std::vector<OpResult> run_gradchecks(const std::string& scope, const std::string& canary, double tolerance,
                                     std::uint64_t seed = 7);

}  // namespace nbe2e::harness
