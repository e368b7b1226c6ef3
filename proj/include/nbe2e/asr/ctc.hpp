#pragma once

#include <vector>

#include "nbe2e/linalg.hpp"

namespace nbe2e::asr {

struct CtcResult {
  double loss = 0.0;
  Mat grad;  // d loss / d log_probs, [U x V]
};

// Negative log of the total probability of all blank-augmented alignments of
// target, by forward-backward in log space. log_probs rows are per-frame
// log-distributions. Throws std::invalid_argument("no feasible alignment")
// when U is shorter than the target plus its repeated-label separators.
CtcResult ctc_loss(const Mat& log_probs, const std::vector<int>& target, int blank = 0);

// Minimum number of frames an alignment of target needs.
int ctc_min_frames(const std::vector<int>& target);

}  // namespace nbe2e::asr
