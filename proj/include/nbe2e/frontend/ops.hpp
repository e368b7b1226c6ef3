#pragma once

#include <vector>

#include "nbe2e/frontend/kernels.hpp"
#include "nbe2e/linalg.hpp"
#include "nbe2e/signal/stft.hpp"

// Differentiable frontend operations. Features before pooling are laid out as
// O[t, p*F + f] so that "concatenate all look directions" is the identity.
namespace nbe2e::frontend {

enum class Backend { kSerial, kParallel };

using kernels::CMap;
using kernels::ConstCMap;

// Per-channel [T x K] complex matrices.
std::vector<CMat> channel_matrices(const signal::ComplexSpectrogram& spec);

// Y_p[t] = sum_c X_c[t] (.) H_c^p. H is [P*C x K].
std::vector<CMat> spatial_filter(const std::vector<CMat>& X, ConstCMap H, Backend backend = Backend::kParallel);
void spatial_filter_backward(const std::vector<CMat>& gY, const std::vector<CMat>& X, CMap gH,
                             Backend backend = Backend::kParallel);

// O[t, p*F + f] = log(|sum_k Y_p[t, k] S_f^p[k]| + eps). S is [P*F x K]; the
// complex sums are returned in Z for the backward pass.
Mat spectral_filter_logcompress(const std::vector<CMat>& Y, ConstCMap S, int filters, double eps,
                                std::vector<CMat>* Z, Backend backend = Backend::kParallel);
std::vector<CMat> spectral_filter_logcompress_backward(const Mat& gO, const std::vector<CMat>& Y,
                                                       ConstCMap S, const std::vector<CMat>& Z,
                                                       int filters, double eps, CMap gS,
                                                       Backend backend = Backend::kParallel);

// Element-wise max over directions; ties go to the lowest direction index.
struct MaxPoolCache {
  Eigen::MatrixXi argmax;  // [T x F]
};
Mat pool_max(const Mat& O, int directions, int filters, MaxPoolCache* cache);
Mat pool_max_backward(const Mat& g, const MaxPoolCache& cache, int directions, int filters);

// Concatenated directions through an affine map: O M^T + b.
Mat pool_projection(const Mat& O, ConstMatMap M, ConstVecMap b);
Mat pool_projection_backward(const Mat& g, const Mat& O, ConstMatMap M, MatMap gM, VecMap gb);

// score_p(t) = 1^T W O_p[t]; output sum_p softmax_p(score) O_p[t].
struct AttentionPoolCache {
  Mat weights;  // [T x P]
};
Mat pool_attention(const Mat& O, int directions, int filters, ConstMatMap W, AttentionPoolCache* cache);
Mat pool_attention_backward(const Mat& g, const Mat& O, int directions, int filters, ConstMatMap W,
                            const AttentionPoolCache& cache, MatMap gW);

// 1-based bins of width 360/bins over (-180, 180], returned 0-based.
int angle_bin(double azimuth_deg, int bins);

// [O | 1 e^T] M^T + b: the angle embedding joins every frame before the
// projection.
Mat direction_aware(const Mat& O, const RowVec& e, ConstMatMap M, ConstVecMap b);
Mat direction_aware_backward(const Mat& g, const Mat& O, const RowVec& e, ConstMatMap M, MatMap gM,
                             VecMap gb, RowVec* ge);

// Additive attention over the spatial-filter outputs driven by the angle
// embedding:
//   u_p(t) = v^T tanh(W0 psi(Y_p[t]) + We e),  alpha = softmax_p(u),
//   Y[t] = sum_p alpha_p(t) Y_p[t]
// with psi the stacked real and imaginary parts (2K values).
struct DirectionAttentiveCache {
  Mat alpha;                     // [T x P]
  std::vector<Mat> activations;  // per direction, [T x A]
};
CMat direction_attentive(const std::vector<CMat>& Y, const RowVec& e, ConstMatMap W0, ConstMatMap We,
                         ConstVecMap v, DirectionAttentiveCache* cache);
std::vector<CMat> direction_attentive_backward(const CMat& g, const std::vector<CMat>& Y, const RowVec& e,
                                               ConstMatMap W0, ConstMatMap We, ConstVecMap v,
                                               const DirectionAttentiveCache& cache, MatMap gW0, MatMap gWe,
                                               VecMap gv, RowVec* ge);

}  // namespace nbe2e::frontend
