#include "nbe2e/asr/layers.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace nbe2e::asr {

using train::as_mat;

Mat softmax_rows(const Mat& x) {
  Mat y(x.rows(), x.cols());
  for (Eigen::Index r = 0; r < x.rows(); ++r) {
    const double m = x.row(r).maxCoeff();
    y.row(r) = (x.row(r).array() - m).exp().matrix();
    y.row(r) /= y.row(r).sum();
  }
  return y;
}

Mat softmax_rows_backward(const Mat& y, const Mat& g) {
  const Vec dot = y.cwiseProduct(g).rowwise().sum();
  return y.cwiseProduct(g - dot.replicate(1, g.cols()));
}

Mat log_softmax_rows(const Mat& x) {
  Mat y(x.rows(), x.cols());
  for (Eigen::Index r = 0; r < x.rows(); ++r) {
    const double m = x.row(r).maxCoeff();
    const double lse = m + std::log((x.row(r).array() - m).exp().sum());
    y.row(r) = x.row(r).array() - lse;
  }
  return y;
}

Mat log_softmax_rows_backward(const Mat& y, const Mat& g) {
  const Vec gsum = g.rowwise().sum();
  return g - y.array().exp().matrix().cwiseProduct(gsum.replicate(1, g.cols()));
}

Mat sinusoidal_encoding(int length, int dim) {
  Mat pe(length, dim);
  for (int t = 0; t < length; ++t)
    for (int i = 0; i < dim; ++i) {
      const double rate = std::pow(10000.0, -2.0 * (i / 2) / dim);
      pe(t, i) = (i % 2 == 0) ? std::sin(t * rate) : std::cos(t * rate);
    }
  return pe;
}

Mat causal_mask(int length) {
  Mat m = Mat::Zero(length, length);
  for (int i = 0; i < length; ++i)
    for (int j = i + 1; j < length; ++j) m(i, j) = -std::numeric_limits<double>::infinity();
  return m;
}

Mat scaled_dot_attention(const Mat& Q, const Mat& K, const Mat& V, const Mat& mask, AttentionCache* cache) {
  if (Q.cols() != K.cols() || K.rows() != V.rows()) throw std::invalid_argument("attention shape mismatch");
  Mat scores = (Q * K.transpose()) / std::sqrt(static_cast<double>(Q.cols()));
  if (mask.size() != 0) {
    if (mask.rows() != scores.rows() || mask.cols() != scores.cols())
      throw std::invalid_argument("attention mask shape mismatch");
    scores += mask;
  }
  Mat probs = softmax_rows(scores);
  Mat out = probs * V;
  if (cache) cache->probs = std::move(probs);
  return out;
}

void scaled_dot_attention_backward(const Mat& g, const Mat& Q, const Mat& K, const Mat& V,
                                   const AttentionCache& cache, Mat& gQ, Mat& gK, Mat& gV) {
  const double scale = 1.0 / std::sqrt(static_cast<double>(Q.cols()));
  gV = cache.probs.transpose() * g;
  const Mat gs = softmax_rows_backward(cache.probs, g * V.transpose()) * scale;
  gQ = gs * K;
  gK = gs.transpose() * Q;
}

// --- Linear ---

Linear::Linear(ParamStore& store, const std::string& name, int in_, int out_) : in(in_), out(out_) {
  weight = store.add(name + ".weight", {out, in});
  bias = store.add(name + ".bias", {out});
}

void Linear::initialize(ParamStore& store, std::mt19937_64& rng) const {
  train::fill_glorot(store.value(weight), in, out, rng);
  for (double& v : store.value(bias)) v = 0.0;
}

Mat Linear::forward(const ParamStore& store, const Mat& x) const {
  if (x.cols() != in) throw std::invalid_argument("linear input has wrong width");
  Mat y = x * as_mat(store.value(weight), out, in).transpose();
  y.rowwise() += ConstVecMap(store.value(bias).data(), out).transpose();
  return y;
}

Mat Linear::backward(const ParamStore& store, const Mat& g, const Mat& x, Gradients& grads) const {
  as_mat(grads[weight], out, in).noalias() += g.transpose() * x;
  VecMap(grads[bias].data(), out) += g.colwise().sum().transpose();
  return g * as_mat(store.value(weight), out, in);
}

// --- LayerNorm ---

LayerNorm::LayerNorm(ParamStore& store, const std::string& name, int dim_) : dim(dim_) {
  gain = store.add(name + ".gain", {dim});
  bias = store.add(name + ".bias", {dim});
}

void LayerNorm::initialize(ParamStore& store) const {
  for (double& v : store.value(gain)) v = 1.0;
  for (double& v : store.value(bias)) v = 0.0;
}

Mat LayerNorm::forward(const ParamStore& store, const Mat& x, Cache* cache) const {
  const Vec mean = x.rowwise().mean();
  Mat xhat = x - mean.replicate(1, x.cols());
  const Vec var = xhat.array().square().rowwise().mean();
  const Vec inv = (var.array() + eps).rsqrt();
  xhat = inv.asDiagonal() * xhat;
  Mat y = xhat.array().rowwise() * ConstVecMap(store.value(gain).data(), dim).transpose().array();
  y.rowwise() += ConstVecMap(store.value(bias).data(), dim).transpose();
  if (cache) {
    cache->xhat = std::move(xhat);
    cache->inv_std = inv;
  }
  return y;
}

Mat LayerNorm::backward(const ParamStore& store, const Mat& g, const Cache& c, Gradients& grads) const {
  VecMap(grads[gain].data(), dim) += g.cwiseProduct(c.xhat).colwise().sum().transpose();
  VecMap(grads[bias].data(), dim) += g.colwise().sum().transpose();
  const Mat gx = g.array().rowwise() * ConstVecMap(store.value(gain).data(), dim).transpose().array();
  const Vec m1 = gx.rowwise().mean();
  const Vec m2 = gx.cwiseProduct(c.xhat).rowwise().mean();
  Mat out = gx - m1.replicate(1, dim) - c.xhat.cwiseProduct(m2.replicate(1, dim));
  return c.inv_std.asDiagonal() * out;
}

// --- MultiHeadAttention ---

MultiHeadAttention::MultiHeadAttention(ParamStore& store, const std::string& name, int dim_, int heads_)
    : dim(dim_), heads(heads_) {
  if (dim % heads != 0) throw std::invalid_argument("model dim must be divisible by heads");
  wq = Linear(store, name + ".q", dim, dim);
  wk = Linear(store, name + ".k", dim, dim);
  wv = Linear(store, name + ".v", dim, dim);
  wo = Linear(store, name + ".o", dim, dim);
}

void MultiHeadAttention::initialize(ParamStore& store, std::mt19937_64& rng) const {
  for (const Linear* l : {&wq, &wk, &wv, &wo}) l->initialize(store, rng);
}

Mat MultiHeadAttention::forward(const ParamStore& store, const Mat& q_in, const Mat& kv_in, const Mat& mask,
                                Cache* cache) const {
  Cache local;
  Cache& c = cache ? *cache : local;
  c.q_in = q_in;
  c.kv_in = kv_in;
  c.Q = wq.forward(store, q_in);
  c.K = wk.forward(store, kv_in);
  c.V = wv.forward(store, kv_in);
  c.context.resize(q_in.rows(), dim);
  c.heads.resize(heads);
  const int dk = dim / heads;
  for (int h = 0; h < heads; ++h)
    c.context.middleCols(h * dk, dk) = scaled_dot_attention(
        c.Q.middleCols(h * dk, dk), c.K.middleCols(h * dk, dk), c.V.middleCols(h * dk, dk), mask, &c.heads[h]);
  return wo.forward(store, c.context);
}

void MultiHeadAttention::backward(const ParamStore& store, const Mat& g, const Cache& c, Gradients& grads,
                                  Mat& g_q_in, Mat& g_kv_in) const {
  const Mat gctx = wo.backward(store, g, c.context, grads);
  Mat gQ(c.Q.rows(), dim), gK(c.K.rows(), dim), gV(c.V.rows(), dim);
  const int dk = dim / heads;
  Mat q, k, v;
  for (int h = 0; h < heads; ++h) {
    scaled_dot_attention_backward(gctx.middleCols(h * dk, dk), c.Q.middleCols(h * dk, dk),
                                  c.K.middleCols(h * dk, dk), c.V.middleCols(h * dk, dk), c.heads[h], q, k, v);
    gQ.middleCols(h * dk, dk) = q;
    gK.middleCols(h * dk, dk) = k;
    gV.middleCols(h * dk, dk) = v;
  }
  g_q_in = wq.backward(store, gQ, c.q_in, grads);
  g_kv_in = wk.backward(store, gK, c.kv_in, grads);
  g_kv_in += wv.backward(store, gV, c.kv_in, grads);
}

// --- FeedForward ---

FeedForward::FeedForward(ParamStore& store, const std::string& name, int dim, int hidden) {
  up = Linear(store, name + ".up", dim, hidden);
  down = Linear(store, name + ".down", hidden, dim);
}

void FeedForward::initialize(ParamStore& store, std::mt19937_64& rng) const {
  up.initialize(store, rng);
  down.initialize(store, rng);
}

Mat FeedForward::forward(const ParamStore& store, const Mat& x, Cache* cache) const {
  Mat hidden = up.forward(store, x).cwiseMax(0.0);
  Mat y = down.forward(store, hidden);
  if (cache) {
    cache->x = x;
    cache->hidden = std::move(hidden);
  }
  return y;
}

Mat FeedForward::backward(const ParamStore& store, const Mat& g, const Cache& c, Gradients& grads) const {
  Mat gh = down.backward(store, g, c.hidden, grads);
  gh = (c.hidden.array() > 0.0).select(gh, 0.0);
  return up.backward(store, gh, c.x, grads);
}

// --- EncoderBlock ---

EncoderBlock::EncoderBlock(ParamStore& store, const std::string& name, int dim, int heads, int ff_dim)
    : ln1(store, name + ".ln1", dim),
      ln2(store, name + ".ln2", dim),
      attn(store, name + ".attn", dim, heads),
      ff(store, name + ".ff", dim, ff_dim) {}

void EncoderBlock::initialize(ParamStore& store, std::mt19937_64& rng) const {
  ln1.initialize(store);
  ln2.initialize(store);
  attn.initialize(store, rng);
  ff.initialize(store, rng);
}

Mat EncoderBlock::forward(const ParamStore& store, const Mat& x, Cache* cache) const {
  Cache local;
  Cache& c = cache ? *cache : local;
  const Mat a = ln1.forward(store, x, &c.ln1);
  const Mat x1 = x + attn.forward(store, a, a, Mat(), &c.attn);
  return x1 + ff.forward(store, ln2.forward(store, x1, &c.ln2), &c.ff);
}

Mat EncoderBlock::backward(const ParamStore& store, const Mat& g, const Cache& c, Gradients& grads) const {
  Mat g1 = g + ln2.backward(store, ff.backward(store, g, c.ff, grads), c.ln2, grads);
  Mat gq, gkv;
  attn.backward(store, g1, c.attn, grads, gq, gkv);
  return g1 + ln1.backward(store, gq + gkv, c.ln1, grads);
}

// --- DecoderBlock ---

DecoderBlock::DecoderBlock(ParamStore& store, const std::string& name, int dim, int heads, int ff_dim)
    : ln1(store, name + ".ln1", dim),
      ln2(store, name + ".ln2", dim),
      ln3(store, name + ".ln3", dim),
      self_attn(store, name + ".self_attn", dim, heads),
      cross_attn(store, name + ".cross_attn", dim, heads),
      ff(store, name + ".ff", dim, ff_dim) {}

void DecoderBlock::initialize(ParamStore& store, std::mt19937_64& rng) const {
  ln1.initialize(store);
  ln2.initialize(store);
  ln3.initialize(store);
  self_attn.initialize(store, rng);
  cross_attn.initialize(store, rng);
  ff.initialize(store, rng);
}

Mat DecoderBlock::forward(const ParamStore& store, const Mat& x, const Mat& memory, Cache* cache) const {
  Cache local;
  Cache& c = cache ? *cache : local;
  const Mat a = ln1.forward(store, x, &c.ln1);
  const Mat x1 = x + self_attn.forward(store, a, a, causal_mask(static_cast<int>(x.rows())), &c.self);
  const Mat x2 = x1 + cross_attn.forward(store, ln2.forward(store, x1, &c.ln2), memory, Mat(), &c.cross);
  return x2 + ff.forward(store, ln3.forward(store, x2, &c.ln3), &c.ff);
}

Mat DecoderBlock::backward(const ParamStore& store, const Mat& g, const Cache& c, Gradients& grads,
                           Mat& g_memory) const {
  const Mat g2 = g + ln3.backward(store, ff.backward(store, g, c.ff, grads), c.ln3, grads);
  Mat gq, gm;
  cross_attn.backward(store, g2, c.cross, grads, gq, gm);
  if (g_memory.size() == 0) g_memory = gm;
  else g_memory += gm;
  const Mat g1 = g2 + ln2.backward(store, gq, c.ln2, grads);
  Mat gsq, gskv;
  self_attn.backward(store, g1, c.self, grads, gsq, gskv);
  return g1 + ln1.backward(store, gsq + gskv, c.ln1, grads);
}

}  // namespace nbe2e::asr
