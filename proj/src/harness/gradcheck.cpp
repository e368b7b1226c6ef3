#include "nbe2e/harness/gradcheck.hpp"

#include <memory>
#include <random>
#include <stdexcept>

#include "nbe2e/asr/ctc.hpp"
#include "nbe2e/asr/model.hpp"
#include "nbe2e/frontend/frontend.hpp"
#include "nbe2e/frontend/ops.hpp"

namespace nbe2e::harness {
namespace {

using train::as_cmat;
using train::as_mat;
using train::Gradients;
using train::ParamId;
using train::ParamStore;

Mat randn(Eigen::Index r, Eigen::Index c, std::mt19937_64& rng, double scale = 1.0) {
  std::normal_distribution<double> n(0.0, scale);
  Mat m(r, c);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = n(rng);
  return m;
}

CMat crandn(Eigen::Index r, Eigen::Index c, std::mt19937_64& rng, double scale = 1.0) {
  CMat m(r, c);
  m.real() = randn(r, c, rng, scale);
  m.imag() = randn(r, c, rng, scale);
  return m;
}

void fill(ParamStore& s, ParamId id, std::mt19937_64& rng, double scale = 1.0) {
  std::normal_distribution<double> n(0.0, scale);
  for (double& v : s.value(id)) v = n(rng);
}

double dot(const Mat& a, const Mat& b) { return a.cwiseProduct(b).sum(); }
double dot(const CMat& a, const CMat& b) {
  return a.real().cwiseProduct(b.real()).sum() + a.imag().cwiseProduct(b.imag()).sum();
}

// Gradient check of loss = <R, f(params)> with the op's own backward.
train::GradCheckReport check(const std::shared_ptr<ParamStore>& store, const train::LossFn& loss,
                             const train::GradFn& grad, bool corrupt, std::uint64_t seed) {
  train::GradCheckOptions o;
  o.seed = seed;
  return train::grad_check(
      *store, loss,
      [&](const ParamStore& s, Gradients& g) {
        grad(s, g);
        if (corrupt) g.scale(-1.0);
      },
      o);
}

std::vector<CMat> channels(const ParamStore& s, ParamId id, int n, int rows, int cols) {
  std::vector<CMat> out;
  const auto all = as_cmat(s.value(id), static_cast<Eigen::Index>(n) * rows, cols);
  for (int i = 0; i < n; ++i) out.push_back(all.middleRows(static_cast<Eigen::Index>(i) * rows, rows));
  return out;
}

void add_channels(Gradients& g, ParamId id, const std::vector<CMat>& v) {
  const auto rows = v[0].rows(), cols = v[0].cols();
  auto all = as_cmat(g[id], rows * static_cast<Eigen::Index>(v.size()), cols);
  for (std::size_t i = 0; i < v.size(); ++i) all.middleRows(static_cast<Eigen::Index>(i) * rows, rows) += v[i];
}

train::GradCheckReport spatial_filter_case(std::uint64_t seed, bool corrupt) {
  std::mt19937_64 rng(seed);
  const int C = 2, T = 3, K = 4, P = 2;
  auto s = std::make_shared<ParamStore>();
  const ParamId H = s->add("H", {P, C, K, 2});
  fill(*s, H, rng);
  std::vector<CMat> X;
  for (int c = 0; c < C; ++c) X.push_back(crandn(T, K, rng));
  std::vector<CMat> R;
  for (int p = 0; p < P; ++p) R.push_back(crandn(T, K, rng));
  auto loss = [=](const ParamStore& st) {
    const auto Y = frontend::spatial_filter(X, as_cmat(st.value(H), P * C, K));
    double l = 0;
    for (int p = 0; p < P; ++p) l += dot(Y[p], R[p]);
    return l;
  };
  auto grad = [=](const ParamStore&, Gradients& g) {
    frontend::spatial_filter_backward(R, X, as_cmat(g[H], P * C, K));
  };
  return check(s, loss, grad, corrupt, seed);
}

train::GradCheckReport fclp_case(std::uint64_t seed, bool corrupt) {
  std::mt19937_64 rng(seed);
  const int P = 2, T = 3, K = 5, F = 3;
  const double eps = 1e-7;
  auto s = std::make_shared<ParamStore>();
  const ParamId Yid = s->add("Y", {P, T, K, 2});
  const ParamId S = s->add("S", {P, F, K, 2});
  fill(*s, Yid, rng);
  fill(*s, S, rng);
  const Mat R = randn(T, P * F, rng);
  auto loss = [=](const ParamStore& st) {
    return dot(frontend::spectral_filter_logcompress(channels(st, Yid, P, T, K), as_cmat(st.value(S), P * F, K),
                                                     F, eps, nullptr),
               R);
  };
  auto grad = [=](const ParamStore& st, Gradients& g) {
    const auto Y = channels(st, Yid, P, T, K);
    std::vector<CMat> Z;
    frontend::spectral_filter_logcompress(Y, as_cmat(st.value(S), P * F, K), F, eps, &Z);
    add_channels(g, Yid,
                 frontend::spectral_filter_logcompress_backward(R, Y, as_cmat(st.value(S), P * F, K), Z, F, eps,
                                                                as_cmat(g[S], P * F, K)));
  };
  return check(s, loss, grad, corrupt, seed);
}

train::GradCheckReport pool_max_case(std::uint64_t seed, bool corrupt) {
  std::mt19937_64 rng(seed);
  const int T = 3, P = 4, F = 5;
  auto s = std::make_shared<ParamStore>();
  const ParamId O = s->add("O", {T, P * F});
  fill(*s, O, rng);
  const Mat R = randn(T, F, rng);
  auto loss = [=](const ParamStore& st) {
    return dot(frontend::pool_max(as_mat(st.value(O), T, P * F), P, F, nullptr), R);
  };
  auto grad = [=](const ParamStore& st, Gradients& g) {
    frontend::MaxPoolCache c;
    frontend::pool_max(as_mat(st.value(O), T, P * F), P, F, &c);
    as_mat(g[O], T, P * F) += frontend::pool_max_backward(R, c, P, F);
  };
  return check(s, loss, grad, corrupt, seed);
}

train::GradCheckReport pool_projection_case(std::uint64_t seed, bool corrupt) {
  std::mt19937_64 rng(seed);
  const int T = 3, P = 3, F = 4, D = 5;
  auto s = std::make_shared<ParamStore>();
  const ParamId O = s->add("O", {T, P * F}), M = s->add("M", {D, P * F}), b = s->add("b", {D});
  for (auto id : {O, M, b}) fill(*s, id, rng);
  const Mat R = randn(T, D, rng);
  auto loss = [=](const ParamStore& st) {
    return dot(frontend::pool_projection(as_mat(st.value(O), T, P * F), as_mat(st.value(M), D, P * F),
                                         ConstVecMap(st.value(b).data(), D)),
               R);
  };
  auto grad = [=](const ParamStore& st, Gradients& g) {
    VecMap gb(g[b].data(), D);
    as_mat(g[O], T, P * F) += frontend::pool_projection_backward(
        R, as_mat(st.value(O), T, P * F), as_mat(st.value(M), D, P * F), as_mat(g[M], D, P * F), gb);
  };
  return check(s, loss, grad, corrupt, seed);
}

train::GradCheckReport pool_attention_case(std::uint64_t seed, bool corrupt) {
  std::mt19937_64 rng(seed);
  const int T = 3, P = 3, F = 4;
  auto s = std::make_shared<ParamStore>();
  const ParamId O = s->add("O", {T, P * F}), W = s->add("W", {F, F});
  fill(*s, O, rng);
  fill(*s, W, rng, 0.5);
  const Mat R = randn(T, F, rng);
  auto loss = [=](const ParamStore& st) {
    return dot(frontend::pool_attention(as_mat(st.value(O), T, P * F), P, F, as_mat(st.value(W), F, F), nullptr), R);
  };
  auto grad = [=](const ParamStore& st, Gradients& g) {
    frontend::AttentionPoolCache c;
    const Mat o = as_mat(st.value(O), T, P * F);
    frontend::pool_attention(o, P, F, as_mat(st.value(W), F, F), &c);
    as_mat(g[O], T, P * F) +=
        frontend::pool_attention_backward(R, o, P, F, as_mat(st.value(W), F, F), c, as_mat(g[W], F, F));
  };
  return check(s, loss, grad, corrupt, seed);
}

train::GradCheckReport direction_aware_case(std::uint64_t seed, bool corrupt) {
  std::mt19937_64 rng(seed);
  const int T = 3, P = 3, F = 4, E = 3, D = 5;
  auto s = std::make_shared<ParamStore>();
  const ParamId O = s->add("O", {T, P * F}), e = s->add("E", {E}), M = s->add("M", {D, P * F + E}),
                b = s->add("b", {D});
  for (auto id : {O, e, M, b}) fill(*s, id, rng);
  const Mat R = randn(T, D, rng);
  auto row = [=](const ParamStore& st) { return RowVec(ConstVecMap(st.value(e).data(), E).transpose()); };
  auto loss = [=](const ParamStore& st) {
    return dot(frontend::direction_aware(as_mat(st.value(O), T, P * F), row(st), as_mat(st.value(M), D, P * F + E),
                                         ConstVecMap(st.value(b).data(), D)),
               R);
  };
  auto grad = [=](const ParamStore& st, Gradients& g) {
    VecMap gb(g[b].data(), D);
    RowVec ge = RowVec::Zero(E);
    as_mat(g[O], T, P * F) += frontend::direction_aware_backward(R, as_mat(st.value(O), T, P * F), row(st),
                                                                 as_mat(st.value(M), D, P * F + E),
                                                                 as_mat(g[M], D, P * F + E), gb, &ge);
    VecMap(g[e].data(), E) += ge.transpose();
  };
  return check(s, loss, grad, corrupt, seed);
}

train::GradCheckReport direction_attentive_case(std::uint64_t seed, bool corrupt) {
  std::mt19937_64 rng(seed);
  const int T = 3, P = 3, K = 4, E = 3, A = 5;
  auto s = std::make_shared<ParamStore>();
  const ParamId Yid = s->add("Y", {P, T, K, 2}), e = s->add("E", {E}), W0 = s->add("W0", {A, 2 * K}),
                We = s->add("We", {A, E}), v = s->add("v", {A});
  for (auto id : {Yid, e, We, v}) fill(*s, id, rng);
  fill(*s, W0, rng, 0.3);
  const CMat R = crandn(T, K, rng);
  auto row = [=](const ParamStore& st) { return RowVec(ConstVecMap(st.value(e).data(), E).transpose()); };
  auto loss = [=](const ParamStore& st) {
    return dot(frontend::direction_attentive(channels(st, Yid, P, T, K), row(st), as_mat(st.value(W0), A, 2 * K),
                                             as_mat(st.value(We), A, E), ConstVecMap(st.value(v).data(), A), nullptr),
               R);
  };
  auto grad = [=](const ParamStore& st, Gradients& g) {
    const auto Y = channels(st, Yid, P, T, K);
    frontend::DirectionAttentiveCache c;
    const auto w0 = as_mat(st.value(W0), A, 2 * K);
    const auto we = as_mat(st.value(We), A, E);
    const ConstVecMap vv(st.value(v).data(), A);
    frontend::direction_attentive(Y, row(st), w0, we, vv, &c);
    VecMap gv(g[v].data(), A);
    RowVec ge = RowVec::Zero(E);
    add_channels(g, Yid,
                 frontend::direction_attentive_backward(R, Y, row(st), w0, we, vv, c, as_mat(g[W0], A, 2 * K),
                                                        as_mat(g[We], A, E), gv, &ge));
    VecMap(g[e].data(), E) += ge.transpose();
  };
  return check(s, loss, grad, corrupt, seed);
}

train::GradCheckReport scaled_dot_attention_case(std::uint64_t seed, bool corrupt) {
  std::mt19937_64 rng(seed);
  const int Tq = 4, Tk = 4, d = 3;
  auto s = std::make_shared<ParamStore>();
  const ParamId Q = s->add("Q", {Tq, d}), K = s->add("K", {Tk, d}), V = s->add("V", {Tk, d});
  for (auto id : {Q, K, V}) fill(*s, id, rng);
  const Mat R = randn(Tq, d, rng);
  const Mat mask = asr::causal_mask(Tq);
  auto loss = [=](const ParamStore& st) {
    return dot(asr::scaled_dot_attention(as_mat(st.value(Q), Tq, d), as_mat(st.value(K), Tk, d),
                                         as_mat(st.value(V), Tk, d), mask, nullptr),
               R);
  };
  auto grad = [=](const ParamStore& st, Gradients& g) {
    const Mat q = as_mat(st.value(Q), Tq, d), k = as_mat(st.value(K), Tk, d), v = as_mat(st.value(V), Tk, d);
    asr::AttentionCache c;
    asr::scaled_dot_attention(q, k, v, mask, &c);
    Mat gq, gk, gv;
    asr::scaled_dot_attention_backward(R, q, k, v, c, gq, gk, gv);
    as_mat(g[Q], Tq, d) += gq;
    as_mat(g[K], Tk, d) += gk;
    as_mat(g[V], Tk, d) += gv;
  };
  return check(s, loss, grad, corrupt, seed);
}

train::GradCheckReport layer_norm_case(std::uint64_t seed, bool corrupt) {
  std::mt19937_64 rng(seed);
  const int T = 3, d = 6;
  auto s = std::make_shared<ParamStore>();
  const ParamId X = s->add("x", {T, d});
  const asr::LayerNorm ln(*s, "ln", d);
  for (auto id : {X, ln.gain, ln.bias}) fill(*s, id, rng);
  const Mat R = randn(T, d, rng);
  auto loss = [=](const ParamStore& st) { return dot(ln.forward(st, as_mat(st.value(X), T, d), nullptr), R); };
  auto grad = [=](const ParamStore& st, Gradients& g) {
    asr::LayerNorm::Cache c;
    ln.forward(st, as_mat(st.value(X), T, d), &c);
    as_mat(g[X], T, d) += ln.backward(st, R, c, g);
  };
  return check(s, loss, grad, corrupt, seed);
}

train::GradCheckReport feed_forward_case(std::uint64_t seed, bool corrupt) {
  std::mt19937_64 rng(seed);
  const int T = 3, d = 4, h = 6;
  auto s = std::make_shared<ParamStore>();
  const ParamId X = s->add("x", {T, d});
  const asr::FeedForward ff(*s, "ff", d, h);
  fill(*s, X, rng);
  ff.initialize(*s, rng);
  for (auto id : {ff.up.bias, ff.down.bias}) fill(*s, id, rng, 0.1);
  const Mat R = randn(T, d, rng);
  auto loss = [=](const ParamStore& st) { return dot(ff.forward(st, as_mat(st.value(X), T, d), nullptr), R); };
  auto grad = [=](const ParamStore& st, Gradients& g) {
    asr::FeedForward::Cache c;
    ff.forward(st, as_mat(st.value(X), T, d), &c);
    as_mat(g[X], T, d) += ff.backward(st, R, c, g);
  };
  return check(s, loss, grad, corrupt, seed);
}

train::GradCheckReport multi_head_attention_case(std::uint64_t seed, bool corrupt) {
  std::mt19937_64 rng(seed);
  const int Tq = 3, Tk = 4, d = 4, heads = 2;
  auto s = std::make_shared<ParamStore>();
  const ParamId Xq = s->add("xq", {Tq, d}), Xkv = s->add("xkv", {Tk, d});
  const asr::MultiHeadAttention mha(*s, "mha", d, heads);
  fill(*s, Xq, rng);
  fill(*s, Xkv, rng);
  mha.initialize(*s, rng);
  const Mat R = randn(Tq, d, rng);
  auto loss = [=](const ParamStore& st) {
    return dot(mha.forward(st, as_mat(st.value(Xq), Tq, d), as_mat(st.value(Xkv), Tk, d), Mat(), nullptr), R);
  };
  auto grad = [=](const ParamStore& st, Gradients& g) {
    asr::MultiHeadAttention::Cache c;
    mha.forward(st, as_mat(st.value(Xq), Tq, d), as_mat(st.value(Xkv), Tk, d), Mat(), &c);
    Mat gq, gkv;
    mha.backward(st, R, c, g, gq, gkv);
    as_mat(g[Xq], Tq, d) += gq;
    as_mat(g[Xkv], Tk, d) += gkv;
  };
  return check(s, loss, grad, corrupt, seed);
}

train::GradCheckReport encoder_block_case(std::uint64_t seed, bool corrupt) {
  std::mt19937_64 rng(seed);
  const int T = 4, d = 4;
  auto s = std::make_shared<ParamStore>();
  const ParamId X = s->add("x", {T, d});
  const asr::EncoderBlock blk(*s, "enc", d, 2, 6);
  fill(*s, X, rng);
  blk.initialize(*s, rng);
  const Mat R = randn(T, d, rng);
  auto loss = [=](const ParamStore& st) { return dot(blk.forward(st, as_mat(st.value(X), T, d), nullptr), R); };
  auto grad = [=](const ParamStore& st, Gradients& g) {
    asr::EncoderBlock::Cache c;
    blk.forward(st, as_mat(st.value(X), T, d), &c);
    as_mat(g[X], T, d) += blk.backward(st, R, c, g);
  };
  return check(s, loss, grad, corrupt, seed);
}

train::GradCheckReport decoder_block_case(std::uint64_t seed, bool corrupt) {
  std::mt19937_64 rng(seed);
  const int L = 3, U = 4, d = 4;
  auto s = std::make_shared<ParamStore>();
  const ParamId X = s->add("x", {L, d}), M = s->add("memory", {U, d});
  const asr::DecoderBlock blk(*s, "dec", d, 2, 6);
  fill(*s, X, rng);
  fill(*s, M, rng);
  blk.initialize(*s, rng);
  const Mat R = randn(L, d, rng);
  auto loss = [=](const ParamStore& st) {
    return dot(blk.forward(st, as_mat(st.value(X), L, d), as_mat(st.value(M), U, d), nullptr), R);
  };
  auto grad = [=](const ParamStore& st, Gradients& g) {
    asr::DecoderBlock::Cache c;
    blk.forward(st, as_mat(st.value(X), L, d), as_mat(st.value(M), U, d), &c);
    Mat gm;
    as_mat(g[X], L, d) += blk.backward(st, R, c, g, gm);
    as_mat(g[M], U, d) += gm;
  };
  return check(s, loss, grad, corrupt, seed);
}

train::GradCheckReport encoder_case(std::uint64_t seed, bool corrupt) {
  std::mt19937_64 rng(seed);
  asr::EncoderConfig cfg;
  cfg.input_dim = 3;
  cfg.model_dim = 4;
  cfg.heads = 2;
  cfg.ff_dim = 6;
  cfg.blocks = 1;
  cfg.subsampling = 2;
  const int T = 5;
  auto s = std::make_shared<ParamStore>();
  const ParamId X = s->add("features", {T, cfg.input_dim});
  const asr::Encoder enc(*s, cfg);
  fill(*s, X, rng);
  enc.initialize(*s, rng);
  const int U = asr::subsampled_length(T, cfg.subsampling);
  const Mat R = randn(U, cfg.model_dim, rng);
  auto loss = [=](const ParamStore& st) {
    return dot(enc.forward(st, as_mat(st.value(X), T, cfg.input_dim), nullptr), R);
  };
  auto grad = [=](const ParamStore& st, Gradients& g) {
    asr::Encoder::Cache c;
    enc.forward(st, as_mat(st.value(X), T, cfg.input_dim), &c);
    as_mat(g[X], T, cfg.input_dim) += enc.backward(st, R, c, g);
  };
  return check(s, loss, grad, corrupt, seed);
}

train::GradCheckReport ctc_case(std::uint64_t seed, bool corrupt) {
  std::mt19937_64 rng(seed);
  const int U = 5, V = 4;
  const std::vector<int> target{1, 2, 2};
  auto s = std::make_shared<ParamStore>();
  const ParamId Z = s->add("logits", {U, V});
  fill(*s, Z, rng);
  auto loss = [=](const ParamStore& st) {
    return asr::ctc_loss(asr::log_softmax_rows(as_mat(st.value(Z), U, V)), target).loss;
  };
  auto grad = [=](const ParamStore& st, Gradients& g) {
    const Mat lp = asr::log_softmax_rows(as_mat(st.value(Z), U, V));
    as_mat(g[Z], U, V) += asr::log_softmax_rows_backward(lp, asr::ctc_loss(lp, target).grad);
  };
  return check(s, loss, grad, corrupt, seed);
}

train::GradCheckReport decoder_loss_case(std::uint64_t seed, bool corrupt) {
  std::mt19937_64 rng(seed);
  asr::DecoderConfig cfg;
  cfg.vocab = 6;
  cfg.model_dim = 4;
  cfg.heads = 2;
  cfg.ff_dim = 6;
  cfg.blocks = 1;
  const int U = 3;
  auto s = std::make_shared<ParamStore>();
  const ParamId H = s->add("h", {U, cfg.model_dim});
  const asr::Decoder dec(*s, cfg);
  fill(*s, H, rng);
  dec.initialize(*s, rng);
  const std::vector<int> target{4, 5, 4, 2};
  auto loss = [=](const ParamStore& st) {
    return asr::attention_decoder_loss(st, dec, as_mat(st.value(H), U, cfg.model_dim), target, 1, 2, nullptr).loss;
  };
  auto grad = [=](const ParamStore& st, Gradients& g) {
    const auto r = asr::attention_decoder_loss(st, dec, as_mat(st.value(H), U, cfg.model_dim), target, 1, 2, &g);
    as_mat(g[H], U, cfg.model_dim) += r.grad;
  };
  return check(s, loss, grad, corrupt, seed);
}

train::GradCheckReport joint_case(std::uint64_t seed, bool corrupt) {
  std::mt19937_64 rng(seed);
  asr::AsrConfig cfg;
  cfg.encoder = {3, 4, 2, 6, 1, 2};
  cfg.decoder = {7, 4, 2, 6, 1};
  const int T = 9;
  auto s = std::make_shared<ParamStore>();
  const ParamId X = s->add("features", {T, 3});
  const asr::AsrModel model(*s, cfg);
  fill(*s, X, rng);
  model.initialize(*s, rng);
  const std::vector<int> words{4, 6, 5};
  auto loss = [=](const ParamStore& st) {
    return model.loss(st, as_mat(st.value(X), T, 3), words, nullptr, nullptr).theta;
  };
  auto grad = [=](const ParamStore& st, Gradients& g) {
    Mat gx;
    model.loss(st, as_mat(st.value(X), T, 3), words, &g, &gx);
    as_mat(g[X], T, 3) += gx;
  };
  return check(s, loss, grad, corrupt, seed);
}

train::GradCheckReport frontend_case(frontend::FrontendMode mode, std::uint64_t seed, bool corrupt) {
  std::mt19937_64 rng(seed);
  frontend::FrontendConfig cfg;
  cfg.mode = mode;
  cfg.stft = {32, 16, 32, signal::WindowType::kHann};
  cfg.channels = 2;
  cfg.directions = 3;
  cfg.filters = 4;
  cfg.output_dim = 5;
  cfg.embedding_dim = 4;
  cfg.attention_dim = 6;
  auto s = std::make_shared<ParamStore>();
  const frontend::NeuralFrontend fe(cfg, *s);
  fe.initialize(*s, rng);
  // Perturb every block so no coordinate sits at a special value.
  std::normal_distribution<double> n(0.0, 0.05);
  for (ParamId b = 0; b < s->size(); ++b)
    for (double& v : s->value(b)) v += n(rng);
  s->touch();

  signal::MultichannelWaveform wave(16000.0, 2, 128);
  for (auto& ch : wave.channels)
    for (double& v : ch) v = n(rng) * 10.0;
  const std::optional<double> az = frontend::uses_direction(mode) ? std::optional<double>(37.0) : std::nullopt;
  const int T = cfg.stft.num_frames(wave.length());
  const Mat R = randn(T, cfg.feature_dim(), rng);
  auto loss = [=, &fe](const ParamStore& st) { return dot(fe.forward_wave(st, wave, az, nullptr), R); };
  auto grad = [=, &fe](const ParamStore& st, Gradients& g) {
    frontend::NeuralFrontend::Cache c;
    fe.forward_wave(st, wave, az, &c);
    fe.backward(st, R, c, g);
  };
  return check(s, loss, grad, corrupt, seed);
}

}  // namespace

const std::vector<GradCheckCase>& gradcheck_registry() {
  using frontend::FrontendMode;
  static const std::vector<GradCheckCase> cases = {
      {"spatial_filter", spatial_filter_case},
      {"spectral_filter_logcompress", fclp_case},
      {"pool_max", pool_max_case},
      {"pool_projection", pool_projection_case},
      {"pool_attention", pool_attention_case},
      {"direction_aware", direction_aware_case},
      {"direction_attentive", direction_attentive_case},
      {"frontend.max", [](auto s, bool c) { return frontend_case(FrontendMode::kMaxPool, s, c); }},
      {"frontend.projection", [](auto s, bool c) { return frontend_case(FrontendMode::kProjection, s, c); }},
      {"frontend.attention", [](auto s, bool c) { return frontend_case(FrontendMode::kAttention, s, c); }},
      {"frontend.dir_aware", [](auto s, bool c) { return frontend_case(FrontendMode::kDirAware, s, c); }},
      {"frontend.dir_attentive", [](auto s, bool c) { return frontend_case(FrontendMode::kDirAttentive, s, c); }},
      {"scaled_dot_attention", scaled_dot_attention_case},
      {"multi_head_attention", multi_head_attention_case},
      {"layer_norm", layer_norm_case},
      {"feed_forward", feed_forward_case},
      {"encoder_block", encoder_block_case},
      {"decoder_block", decoder_block_case},
      {"encoder", encoder_case},
      {"ctc_loss", ctc_case},
      {"attention_decoder_loss", decoder_loss_case},
      {"joint_loss", joint_case},
  };
  return cases;
}

std::vector<OpResult> run_gradchecks(const std::string& scope, const std::string& canary, double tolerance,
                                     std::uint64_t seed) {
  const auto& cases = gradcheck_registry();
  auto known = [&](const std::string& n) {
    for (const auto& c : cases)
      if (c.name == n) return true;
    return false;
  };
  if (scope != "all" && !known(scope)) throw std::invalid_argument("unknown op '" + scope + "'");
  if (!canary.empty() && !known(canary)) throw std::invalid_argument("unknown canary op '" + canary + "'");

  std::vector<OpResult> out;
  for (const auto& c : cases) {
    if (scope != "all" && c.name != scope) continue;
    OpResult r;
    r.op = c.name;
    r.report = c.run(seed, c.name == canary);
    r.passed = r.report.passed(tolerance);
    out.push_back(std::move(r));
  }
  return out;
}

}  // namespace nbe2e::harness
