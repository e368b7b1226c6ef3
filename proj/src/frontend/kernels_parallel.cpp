#include <stdexcept>

#include "nbe2e/frontend/kernels.hpp"

namespace nbe2e::frontend::kernels {

void spatial_filter_parallel(const std::vector<CMat>& X, ConstCMap H, std::vector<CMat>& Y) {
  const int C = static_cast<int>(X.size());
  if (C == 0 || H.rows() % C != 0 || H.cols() != X[0].cols())
    throw std::invalid_argument("spatial filter shape mismatch");
  const int P = static_cast<int>(H.rows()) / C;
  Y.resize(P);
#pragma omp parallel for schedule(static)
  for (int p = 0; p < P; ++p) {
    // row by row: the broadcast expression form is several times slower
    Y[p].resize(X[0].rows(), X[0].cols());
    for (Eigen::Index t = 0; t < X[0].rows(); ++t) {
      Y[p].row(t) = X[0].row(t).cwiseProduct(H.row(p * C));
      for (int c = 1; c < C; ++c) Y[p].row(t) += X[c].row(t).cwiseProduct(H.row(p * C + c));
    }
  }
}

void spatial_filter_backward_parallel(const std::vector<CMat>& gY, const std::vector<CMat>& X, CMap gH) {
  const int C = static_cast<int>(X.size());
  const int P = static_cast<int>(gY.size());
#pragma omp parallel for schedule(static)
  for (int p = 0; p < P; ++p)
    for (int c = 0; c < C; ++c)
      for (Eigen::Index t = 0; t < X[c].rows(); ++t)
        gH.row(p * C + c) += gY[p].row(t).cwiseProduct(X[c].row(t).conjugate());
}

void fclp_parallel(const std::vector<CMat>& Y, ConstCMap S, int filters, double eps, std::vector<CMat>& Z,
                   Mat& O) {
  const int P = static_cast<int>(Y.size());
  if (P == 0 || S.rows() != static_cast<Eigen::Index>(P) * filters || S.cols() != Y[0].cols())
    throw std::invalid_argument("spectral filter shape mismatch");
  const auto T = Y[0].rows();
  Z.resize(P);
  O.resize(T, static_cast<Eigen::Index>(P) * filters);
#pragma omp parallel for schedule(static)
  for (int p = 0; p < P; ++p) {
    Z[p].noalias() = Y[p] * S.middleRows(p * filters, filters).transpose();
    O.middleCols(p * filters, filters) = (Z[p].array().abs() + eps).log().matrix();
  }
}

void fclp_backward_parallel(const Mat& gO, const std::vector<CMat>& Y, ConstCMap S,
                            const std::vector<CMat>& Z, int filters, double eps, std::vector<CMat>& gY,
                            CMap gS) {
  const int P = static_cast<int>(Y.size());
  gY.resize(P);
#pragma omp parallel for schedule(static)
  for (int p = 0; p < P; ++p) {
    const auto mag = Z[p].array().abs();
    // d log(|z| + eps) / d(re, im) = z / (|z| (|z| + eps)), zero at z = 0
    const Eigen::ArrayXXd scale =
        (mag > 0.0).select(gO.middleCols(p * filters, filters).array() / (mag * (mag + eps)), 0.0);
    const CMat gZ = (Z[p].array() * scale.cast<cdouble>()).matrix();
    const auto Sp = S.middleRows(p * filters, filters);
    gY[p].noalias() = gZ * Sp.conjugate();
    gS.middleRows(p * filters, filters).noalias() += gZ.transpose() * Y[p].conjugate();
  }
}

}  // namespace nbe2e::frontend::kernels
