#pragma once

#include <vector>

#include "nbe2e/linalg.hpp"

// Hot loops of the neural frontend. Each kernel has a scalar reference
// version (plain loops over complex_mul_as_real) and an OpenMP version that
// parallelises over look directions and uses Eigen's complex GEMM. The
// reference versions are kept for testing and benchmarking.
namespace nbe2e::frontend::kernels {

using ConstCMap = Eigen::Map<const CMat>;
using CMap = Eigen::Map<CMat>;

// Y[p] = sum_c X[c] (.) H[p*C + c], X[c] and Y[p] are [T x K].
void spatial_filter_serial(const std::vector<CMat>& X, ConstCMap H, std::vector<CMat>& Y);
void spatial_filter_parallel(const std::vector<CMat>& X, ConstCMap H, std::vector<CMat>& Y);

// gH[p*C + c, k] += sum_t gY[p][t, k] * conj(X[c][t, k])
void spatial_filter_backward_serial(const std::vector<CMat>& gY, const std::vector<CMat>& X, CMap gH);
void spatial_filter_backward_parallel(const std::vector<CMat>& gY, const std::vector<CMat>& X, CMap gH);

// Z[p][t, f] = sum_k Y[p][t, k] * S[p*F + f, k]
// O[t, p*F + f] = log(|Z[p][t, f]| + eps)
void fclp_serial(const std::vector<CMat>& Y, ConstCMap S, int filters, double eps, std::vector<CMat>& Z,
                 Mat& O);
void fclp_parallel(const std::vector<CMat>& Y, ConstCMap S, int filters, double eps, std::vector<CMat>& Z,
                   Mat& O);

// Given dL/dO, writes dL/dY into gY and accumulates dL/dS into gS.
void fclp_backward_serial(const Mat& gO, const std::vector<CMat>& Y, ConstCMap S,
                          const std::vector<CMat>& Z, int filters, double eps, std::vector<CMat>& gY,
                          CMap gS);
void fclp_backward_parallel(const Mat& gO, const std::vector<CMat>& Y, ConstCMap S,
                            const std::vector<CMat>& Z, int filters, double eps, std::vector<CMat>& gY,
                            CMap gS);

}  // namespace nbe2e::frontend::kernels
