#pragma once

#include <functional>
#include <string>
#include <vector>

#include "nbe2e/asr/model.hpp"
#include "nbe2e/linalg.hpp"

namespace nbe2e::asr {

// Next-token log-probabilities given the decoded prefix (which starts with
// sos).
using NextTokenFn = std::function<RowVec(const std::vector<int>& prefix)>;

struct BeamOptions {
  int beam = 4;
  int max_len = 12;  // output tokens including eos
  int sos = 1;
  int eos = 2;
  std::vector<int> excluded;  // never emitted (blank, sos, pad)
};

struct Hypothesis {
  std::vector<int> tokens;  // without sos; ends with eos when finished
  double log_prob = 0.0;
  double score = 0.0;  // log_prob / tokens.size()
  bool finished = false;
};

// Beam search over prefixes. Each step expands every live hypothesis by
// every allowed token and keeps the beam best by log-probability (ties go to
// the lexicographically smaller token sequence); hypotheses that emit eos
// leave the beam. At step max_len only eos is allowed, so every hypothesis
// still live is closed there. The answer is the finished hypothesis with the
// highest length-normalised score.
Hypothesis beam_search(const NextTokenFn& next, const BeamOptions& options);

// Beam search with the attention decoder over encoder output h.
Hypothesis beam_search_decode(const ParamStore& store, const Decoder& decoder, const Mat& h,
                              const BeamOptions& options);

struct WerCounts {
  int substitutions = 0;
  int insertions = 0;
  int deletions = 0;
  int reference_length = 0;

  int errors() const { return substitutions + insertions + deletions; }
  double wer() const { return reference_length ? static_cast<double>(errors()) / reference_length : 0.0; }
  WerCounts& operator+=(const WerCounts& o);
};

// Levenshtein alignment; among equal-cost alignments, substitutions are
// preferred, then deletions. Throws std::invalid_argument on an empty
// reference.
WerCounts word_error_rate(const std::vector<std::string>& hyp, const std::vector<std::string>& ref);

}  // namespace nbe2e::asr
