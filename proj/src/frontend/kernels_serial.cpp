#include <stdexcept>

#include "nbe2e/frontend/kernels.hpp"
#include "nbe2e/signal/complex.hpp"

namespace nbe2e::frontend::kernels {
namespace {

using signal::ComplexPair;

ComplexPair pair(const cdouble& z) { return {z.real(), z.imag()}; }
cdouble to_c(ComplexPair z) { return {z.re, z.im}; }
ComplexPair conj(ComplexPair z) { return {z.re, -z.im}; }

}  // namespace

void spatial_filter_serial(const std::vector<CMat>& X, ConstCMap H, std::vector<CMat>& Y) {
  const int C = static_cast<int>(X.size());
  if (C == 0 || H.rows() % C != 0) throw std::invalid_argument("spatial filter shape mismatch");
  const int P = static_cast<int>(H.rows()) / C;
  const auto T = X[0].rows(), K = X[0].cols();
  if (H.cols() != K) throw std::invalid_argument("spatial filter shape mismatch");
  Y.assign(P, CMat::Zero(T, K));
  for (int p = 0; p < P; ++p)
    for (int c = 0; c < C; ++c)
      for (Eigen::Index t = 0; t < T; ++t)
        for (Eigen::Index k = 0; k < K; ++k) {
          const auto prod = signal::complex_mul_as_real(pair(X[c](t, k)), pair(H(p * C + c, k)));
          Y[p](t, k) += to_c(prod);
        }
}

void spatial_filter_backward_serial(const std::vector<CMat>& gY, const std::vector<CMat>& X, CMap gH) {
  const int C = static_cast<int>(X.size());
  const int P = static_cast<int>(gY.size());
  for (int p = 0; p < P; ++p)
    for (int c = 0; c < C; ++c)
      for (Eigen::Index t = 0; t < X[c].rows(); ++t)
        for (Eigen::Index k = 0; k < X[c].cols(); ++k)
          gH(p * C + c, k) += to_c(signal::complex_mul_as_real(pair(gY[p](t, k)), conj(pair(X[c](t, k)))));
}

void fclp_serial(const std::vector<CMat>& Y, ConstCMap S, int filters, double eps, std::vector<CMat>& Z,
                 Mat& O) {
  const int P = static_cast<int>(Y.size());
  if (P == 0 || S.rows() != static_cast<Eigen::Index>(P) * filters || S.cols() != Y[0].cols())
    throw std::invalid_argument("spectral filter shape mismatch");
  const auto T = Y[0].rows(), K = Y[0].cols();
  Z.assign(P, CMat::Zero(T, filters));
  O.resize(T, static_cast<Eigen::Index>(P) * filters);
  for (int p = 0; p < P; ++p)
    for (Eigen::Index t = 0; t < T; ++t)
      for (int f = 0; f < filters; ++f) {
        ComplexPair acc;
        for (Eigen::Index k = 0; k < K; ++k) {
          const auto prod = signal::complex_mul_as_real(pair(Y[p](t, k)), pair(S(p * filters + f, k)));
          acc.re += prod.re;
          acc.im += prod.im;
        }
        Z[p](t, f) = to_c(acc);
        O(t, p * filters + f) = signal::log_magnitude(acc, eps);
      }
}

void fclp_backward_serial(const Mat& gO, const std::vector<CMat>& Y, ConstCMap S,
                          const std::vector<CMat>& Z, int filters, double eps, std::vector<CMat>& gY,
                          CMap gS) {
  const int P = static_cast<int>(Y.size());
  const auto T = Y[0].rows(), K = Y[0].cols();
  gY.assign(P, CMat::Zero(T, K));
  for (int p = 0; p < P; ++p)
    for (Eigen::Index t = 0; t < T; ++t)
      for (int f = 0; f < filters; ++f) {
        const auto d = signal::log_magnitude_grad(pair(Z[p](t, f)), eps);
        const double g = gO(t, p * filters + f);
        const ComplexPair gz{g * d.re, g * d.im};
        for (Eigen::Index k = 0; k < K; ++k) {
          gY[p](t, k) += to_c(signal::complex_mul_as_real(gz, conj(pair(S(p * filters + f, k)))));
          gS(p * filters + f, k) += to_c(signal::complex_mul_as_real(gz, conj(pair(Y[p](t, k)))));
        }
      }
}

}  // namespace nbe2e::frontend::kernels
