#include "nbe2e/frontend/ops.hpp"

#include <cmath>
#include <stdexcept>

namespace nbe2e::frontend {
namespace {

Mat psi(const CMat& y) {
  Mat out(y.rows(), 2 * y.cols());
  out.leftCols(y.cols()) = y.real();
  out.rightCols(y.cols()) = y.imag();
  return out;
}

// Row-wise softmax.
Mat softmax_rows(const Mat& s) {
  Mat out(s.rows(), s.cols());
  for (Eigen::Index t = 0; t < s.rows(); ++t) {
    const double m = s.row(t).maxCoeff();
    out.row(t) = (s.row(t).array() - m).exp().matrix();
    out.row(t) /= out.row(t).sum();
  }
  return out;
}

// Backward of a row-wise softmax: a (.) (g - rowsum(a (.) g)).
Mat softmax_rows_backward(const Mat& a, const Mat& g) {
  Mat out = a.cwiseProduct(g);
  const Vec dot = out.rowwise().sum();
  out -= a.cwiseProduct(dot.replicate(1, a.cols()));
  return out;
}

}  // namespace

std::vector<CMat> channel_matrices(const signal::ComplexSpectrogram& spec) {
  std::vector<CMat> X;
  X.reserve(spec.channels);
  for (int c = 0; c < spec.channels; ++c) X.push_back(spec.channel_matrix(c));
  return X;
}

std::vector<CMat> spatial_filter(const std::vector<CMat>& X, ConstCMap H, Backend backend) {
  std::vector<CMat> Y;
  if (backend == Backend::kSerial) kernels::spatial_filter_serial(X, H, Y);
  else kernels::spatial_filter_parallel(X, H, Y);
  return Y;
}

void spatial_filter_backward(const std::vector<CMat>& gY, const std::vector<CMat>& X, CMap gH,
                             Backend backend) {
  if (backend == Backend::kSerial) kernels::spatial_filter_backward_serial(gY, X, gH);
  else kernels::spatial_filter_backward_parallel(gY, X, gH);
}

Mat spectral_filter_logcompress(const std::vector<CMat>& Y, ConstCMap S, int filters, double eps,
                                std::vector<CMat>* Z, Backend backend) {
  std::vector<CMat> local;
  auto& z = Z ? *Z : local;
  Mat O;
  if (backend == Backend::kSerial) kernels::fclp_serial(Y, S, filters, eps, z, O);
  else kernels::fclp_parallel(Y, S, filters, eps, z, O);
  return O;
}

std::vector<CMat> spectral_filter_logcompress_backward(const Mat& gO, const std::vector<CMat>& Y,
                                                       ConstCMap S, const std::vector<CMat>& Z,
                                                       int filters, double eps, CMap gS, Backend backend) {
  std::vector<CMat> gY;
  if (backend == Backend::kSerial) kernels::fclp_backward_serial(gO, Y, S, Z, filters, eps, gY, gS);
  else kernels::fclp_backward_parallel(gO, Y, S, Z, filters, eps, gY, gS);
  return gY;
}

Mat pool_max(const Mat& O, int directions, int filters, MaxPoolCache* cache) {
  if (O.cols() != static_cast<Eigen::Index>(directions) * filters)
    throw std::invalid_argument("pool_max shape mismatch");
  Mat out = O.leftCols(filters);
  Eigen::MatrixXi arg = Eigen::MatrixXi::Zero(O.rows(), filters);
  for (int p = 1; p < directions; ++p)
    for (Eigen::Index t = 0; t < O.rows(); ++t)
      for (int f = 0; f < filters; ++f) {
        const double v = O(t, p * filters + f);
        if (v > out(t, f)) {
          out(t, f) = v;
          arg(t, f) = p;
        }
      }
  if (cache) cache->argmax = std::move(arg);
  return out;
}

Mat pool_max_backward(const Mat& g, const MaxPoolCache& cache, int directions, int filters) {
  Mat gO = Mat::Zero(g.rows(), static_cast<Eigen::Index>(directions) * filters);
  for (Eigen::Index t = 0; t < g.rows(); ++t)
    for (int f = 0; f < filters; ++f) gO(t, cache.argmax(t, f) * filters + f) = g(t, f);
  return gO;
}

Mat pool_projection(const Mat& O, ConstMatMap M, ConstVecMap b) {
  if (M.cols() != O.cols() || b.size() != M.rows()) throw std::invalid_argument("pool_projection shape mismatch");
  Mat out = O * M.transpose();
  out.rowwise() += b.transpose();
  return out;
}

Mat pool_projection_backward(const Mat& g, const Mat& O, ConstMatMap M, MatMap gM, VecMap gb) {
  gM.noalias() += g.transpose() * O;
  gb += g.colwise().sum().transpose();
  return g * M;
}

Mat pool_attention(const Mat& O, int directions, int filters, ConstMatMap W, AttentionPoolCache* cache) {
  if (O.cols() != static_cast<Eigen::Index>(directions) * filters || W.rows() != filters || W.cols() != filters)
    throw std::invalid_argument("pool_attention shape mismatch");
  const RowVec wbar = W.colwise().sum();
  Mat scores(O.rows(), directions);
  for (int p = 0; p < directions; ++p) scores.col(p) = O.middleCols(p * filters, filters) * wbar.transpose();
  Mat alpha = softmax_rows(scores);
  Mat out = Mat::Zero(O.rows(), filters);
  for (int p = 0; p < directions; ++p)
    out += alpha.col(p).asDiagonal() * O.middleCols(p * filters, filters);
  if (cache) cache->weights = std::move(alpha);
  return out;
}

Mat pool_attention_backward(const Mat& g, const Mat& O, int directions, int filters, ConstMatMap W,
                            const AttentionPoolCache& cache, MatMap gW) {
  const RowVec wbar = W.colwise().sum();
  const Mat& alpha = cache.weights;
  Mat galpha(g.rows(), directions);
  for (int p = 0; p < directions; ++p)
    galpha.col(p) = O.middleCols(p * filters, filters).cwiseProduct(g).rowwise().sum();
  const Mat gs = softmax_rows_backward(alpha, galpha);
  Mat gO(O.rows(), O.cols());
  RowVec gwbar = RowVec::Zero(filters);
  for (int p = 0; p < directions; ++p) {
    gO.middleCols(p * filters, filters) = alpha.col(p).asDiagonal() * g + gs.col(p) * wbar;
    gwbar += gs.col(p).transpose() * O.middleCols(p * filters, filters);
  }
  gW.rowwise() += gwbar;
  return gO;
}

int angle_bin(double azimuth_deg, int bins) {
  if (!(azimuth_deg > -180.0 && azimuth_deg <= 180.0)) throw std::invalid_argument("azimuth out of range");
  const double width = 360.0 / bins;
  int b = static_cast<int>(std::ceil((azimuth_deg + 180.0) / width)) - 1;
  if (b < 0) b = 0;
  if (b >= bins) b = bins - 1;
  return b;
}

Mat direction_aware(const Mat& O, const RowVec& e, ConstMatMap M, ConstVecMap b) {
  const auto pf = O.cols();
  if (M.cols() != pf + e.size() || b.size() != M.rows()) throw std::invalid_argument("direction_aware shape mismatch");
  Mat out = O * M.leftCols(pf).transpose();
  const RowVec offset = e * M.rightCols(e.size()).transpose() + b.transpose();
  out.rowwise() += offset;
  return out;
}

Mat direction_aware_backward(const Mat& g, const Mat& O, const RowVec& e, ConstMatMap M, MatMap gM,
                             VecMap gb, RowVec* ge) {
  const auto pf = O.cols();
  const RowVec gsum = g.colwise().sum();
  gM.leftCols(pf).noalias() += g.transpose() * O;
  gM.rightCols(e.size()).noalias() += gsum.transpose() * e;
  gb += gsum.transpose();
  if (ge) *ge += gsum * M.rightCols(e.size());
  return g * M.leftCols(pf);
}

CMat direction_attentive(const std::vector<CMat>& Y, const RowVec& e, ConstMatMap W0, ConstMatMap We,
                         ConstVecMap v, DirectionAttentiveCache* cache) {
  const int P = static_cast<int>(Y.size());
  if (P == 0 || W0.cols() != 2 * Y[0].cols() || We.cols() != e.size() || We.rows() != W0.rows() ||
      v.size() != W0.rows())
    throw std::invalid_argument("direction_attentive shape mismatch");
  const auto T = Y[0].rows();
  const RowVec bias = e * We.transpose();
  Mat u(T, P);
  std::vector<Mat> act(P);
  for (int p = 0; p < P; ++p) {
    Mat pre = psi(Y[p]) * W0.transpose();
    pre.rowwise() += bias;
    act[p] = pre.array().tanh().matrix();
    u.col(p) = act[p] * v;
  }
  Mat alpha = softmax_rows(u);
  CMat out = CMat::Zero(T, Y[0].cols());
  for (int p = 0; p < P; ++p) out += alpha.col(p).cast<cdouble>().asDiagonal() * Y[p];
  if (cache) {
    cache->alpha = std::move(alpha);
    cache->activations = std::move(act);
  }
  return out;
}

std::vector<CMat> direction_attentive_backward(const CMat& g, const std::vector<CMat>& Y, const RowVec& e,
                                               ConstMatMap W0, ConstMatMap We, ConstVecMap v,
                                               const DirectionAttentiveCache& cache, MatMap gW0, MatMap gWe,
                                               VecMap gv, RowVec* ge) {
  const int P = static_cast<int>(Y.size());
  const auto T = g.rows(), K = g.cols();
  const Mat& alpha = cache.alpha;
  Mat galpha(T, P);
  for (int p = 0; p < P; ++p)
    galpha.col(p) = (g.real().cwiseProduct(Y[p].real()) + g.imag().cwiseProduct(Y[p].imag())).rowwise().sum();
  const Mat gu = softmax_rows_backward(alpha, galpha);

  std::vector<CMat> gY(P);
  RowVec gbias = RowVec::Zero(W0.rows());
  for (int p = 0; p < P; ++p) {
    const Mat& a = cache.activations[p];
    gv += a.transpose() * gu.col(p);
    const Mat gpre = (gu.col(p) * v.transpose()).cwiseProduct((1.0 - a.array().square()).matrix());
    gW0.noalias() += gpre.transpose() * psi(Y[p]);
    gbias += gpre.colwise().sum();
    const Mat gpsi = gpre * W0;
    gY[p] = alpha.col(p).cast<cdouble>().asDiagonal() * g;
    gY[p].real() += gpsi.leftCols(K);
    gY[p].imag() += gpsi.rightCols(K);
  }
  gWe.noalias() += gbias.transpose() * e;
  if (ge) *ge += gbias * We;
  return gY;
}

}  // namespace nbe2e::frontend
