#include "nbe2e/asr/decode.hpp"

#include <algorithm>
#include <stdexcept>

namespace nbe2e::asr {
namespace {

bool better(const Hypothesis& a, const Hypothesis& b) {
  if (a.log_prob != b.log_prob) return a.log_prob > b.log_prob;
  return a.tokens < b.tokens;
}

bool better_score(const Hypothesis& a, const Hypothesis& b) {
  if (a.score != b.score) return a.score > b.score;
  return a.tokens < b.tokens;
}

}  // namespace

Hypothesis beam_search(const NextTokenFn& next, const BeamOptions& o) {
  if (o.beam < 1) throw std::invalid_argument("beam width must be at least 1");
  if (o.max_len < 1) throw std::invalid_argument("max_len must be at least 1");
  std::vector<Hypothesis> live{Hypothesis{}}, finished;

  for (int step = 0; step < o.max_len && !live.empty(); ++step) {
    // The last step may only close hypotheses, so every answer is complete.
    const bool last = step == o.max_len - 1;
    std::vector<Hypothesis> candidates;
    for (const auto& hyp : live) {
      std::vector<int> prefix{o.sos};
      prefix.insert(prefix.end(), hyp.tokens.begin(), hyp.tokens.end());
      const RowVec lp = next(prefix);
      for (int v = 0; v < lp.size(); ++v) {
        if (last && v != o.eos) continue;
        if (std::find(o.excluded.begin(), o.excluded.end(), v) != o.excluded.end()) continue;
        Hypothesis c = hyp;
        c.tokens.push_back(v);
        c.log_prob += lp(v);
        c.score = c.log_prob / static_cast<double>(c.tokens.size());
        c.finished = v == o.eos;
        candidates.push_back(std::move(c));
      }
    }
    const auto keep = std::min<std::size_t>(o.beam, candidates.size());
    std::partial_sort(candidates.begin(), candidates.begin() + keep, candidates.end(), better);
    live.clear();
    for (std::size_t i = 0; i < keep; ++i) {
      if (candidates[i].finished) finished.push_back(std::move(candidates[i]));
      else live.push_back(std::move(candidates[i]));
    }
  }

  const auto& pool = finished.empty() ? live : finished;
  if (pool.empty()) return {};
  return *std::min_element(pool.begin(), pool.end(), better_score);
}

Hypothesis beam_search_decode(const ParamStore& store, const Decoder& decoder, const Mat& h,
                              const BeamOptions& options) {
  return beam_search(
      [&](const std::vector<int>& prefix) -> RowVec {
        const Mat lp = decoder.forward(store, prefix, h, nullptr);
        return lp.row(lp.rows() - 1);
      },
      options);
}

WerCounts& WerCounts::operator+=(const WerCounts& o) {
  substitutions += o.substitutions;
  insertions += o.insertions;
  deletions += o.deletions;
  reference_length += o.reference_length;
  return *this;
}

WerCounts word_error_rate(const std::vector<std::string>& hyp, const std::vector<std::string>& ref) {
  if (ref.empty()) throw std::invalid_argument("empty reference");
  const std::size_t n = ref.size(), m = hyp.size();
  std::vector<std::vector<int>> d(n + 1, std::vector<int>(m + 1));
  for (std::size_t i = 0; i <= n; ++i) d[i][0] = static_cast<int>(i);
  for (std::size_t j = 0; j <= m; ++j) d[0][j] = static_cast<int>(j);
  for (std::size_t i = 1; i <= n; ++i)
    for (std::size_t j = 1; j <= m; ++j)
      d[i][j] = std::min({d[i - 1][j - 1] + (ref[i - 1] == hyp[j - 1] ? 0 : 1), d[i - 1][j] + 1, d[i][j - 1] + 1});

  WerCounts c;
  c.reference_length = static_cast<int>(n);
  std::size_t i = n, j = m;
  while (i > 0 || j > 0) {
    if (i > 0 && j > 0 && d[i][j] == d[i - 1][j - 1] + (ref[i - 1] == hyp[j - 1] ? 0 : 1)) {
      if (ref[i - 1] != hyp[j - 1]) ++c.substitutions;
      --i, --j;
    } else if (i > 0 && d[i][j] == d[i - 1][j] + 1) {
      ++c.deletions;
      --i;
    } else {
      ++c.insertions;
      --j;
    }
  }
  return c;
}

}  // namespace nbe2e::asr
