#include "nbe2e/asr/ctc.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace nbe2e::asr {
namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double log_add(double a, double b) {
  if (a == kNegInf) return b;
  if (b == kNegInf) return a;
  const double m = std::max(a, b);
  return m + std::log1p(std::exp(-std::abs(a - b)));
}

}  // namespace

int ctc_min_frames(const std::vector<int>& target) {
  int n = static_cast<int>(target.size());
  for (std::size_t i = 1; i < target.size(); ++i)
    if (target[i] == target[i - 1]) ++n;
  return n;
}

CtcResult ctc_loss(const Mat& log_probs, const std::vector<int>& target, int blank) {
  const int U = static_cast<int>(log_probs.rows());
  const int V = static_cast<int>(log_probs.cols());
  for (int t : target)
    if (t < 0 || t >= V || t == blank) throw std::invalid_argument("ctc target token out of range");
  if (U == 0 || ctc_min_frames(target) > U) throw std::invalid_argument("no feasible alignment");

  // Extended label sequence with blanks between and around the targets.
  const int S = 2 * static_cast<int>(target.size()) + 1;
  std::vector<int> ext(S, blank);
  for (std::size_t i = 0; i < target.size(); ++i) ext[2 * i + 1] = target[i];
  auto can_skip = [&](int s) { return s >= 2 && ext[s] != blank && ext[s] != ext[s - 2]; };

  // alpha includes the emission at frame u; beta excludes it.
  Mat alpha = Mat::Constant(U, S, kNegInf);
  Mat beta = Mat::Constant(U, S, kNegInf);
  alpha(0, 0) = log_probs(0, ext[0]);
  if (S > 1) alpha(0, 1) = log_probs(0, ext[1]);
  for (int u = 1; u < U; ++u)
    for (int s = 0; s < S; ++s) {
      double a = alpha(u - 1, s);
      if (s >= 1) a = log_add(a, alpha(u - 1, s - 1));
      if (can_skip(s)) a = log_add(a, alpha(u - 1, s - 2));
      if (a != kNegInf) alpha(u, s) = a + log_probs(u, ext[s]);
    }

  beta(U - 1, S - 1) = 0.0;
  if (S > 1) beta(U - 1, S - 2) = 0.0;
  for (int u = U - 2; u >= 0; --u)
    for (int s = 0; s < S; ++s) {
      double b = beta(u + 1, s) + log_probs(u + 1, ext[s]);
      if (s + 1 < S) b = log_add(b, beta(u + 1, s + 1) + log_probs(u + 1, ext[s + 1]));
      if (s + 2 < S && can_skip(s + 2)) b = log_add(b, beta(u + 1, s + 2) + log_probs(u + 1, ext[s + 2]));
      beta(u, s) = b;
    }

  double logp = alpha(U - 1, S - 1);
  if (S > 1) logp = log_add(logp, alpha(U - 1, S - 2));
  if (logp == kNegInf) throw std::invalid_argument("no feasible alignment");

  CtcResult r;
  r.loss = -logp;
  r.grad = Mat::Zero(U, V);
  for (int u = 0; u < U; ++u)
    for (int s = 0; s < S; ++s) {
      const double lg = alpha(u, s) + beta(u, s);
      if (lg != kNegInf) r.grad(u, ext[s]) -= std::exp(lg - logp);
    }
  return r;
}

}  // namespace nbe2e::asr
