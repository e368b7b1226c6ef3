#include "nbe2e/asr/model.hpp"

#include <stdexcept>

#include "nbe2e/asr/ctc.hpp"

namespace nbe2e::asr {

using train::as_mat;

// --- Encoder ---

Encoder::Encoder(ParamStore& store, const EncoderConfig& cfg, const std::string& name) : config(cfg) {
  input = Linear(store, name + ".input", cfg.input_dim * cfg.subsampling, cfg.model_dim);
  for (int b = 0; b < cfg.blocks; ++b)
    blocks.emplace_back(store, name + ".block" + std::to_string(b), cfg.model_dim, cfg.heads, cfg.ff_dim);
  final_ln = LayerNorm(store, name + ".final_ln", cfg.model_dim);
}

void Encoder::initialize(ParamStore& store, std::mt19937_64& rng) const {
  input.initialize(store, rng);
  for (const auto& b : blocks) b.initialize(store, rng);
  final_ln.initialize(store);
}

Mat Encoder::forward(const ParamStore& store, const Mat& features, Cache* cache) const {
  const int T = static_cast<int>(features.rows());
  const int D = config.input_dim, R = config.subsampling;
  if (T == 0) throw std::invalid_argument("empty encoder input");
  if (features.cols() != D) throw std::invalid_argument("encoder input has wrong width");
  const Mat x = features + sinusoidal_encoding(T, D);
  const int U = subsampled_length(T, R);
  Mat stacked = Mat::Zero(U, D * R);
  for (int t = 0; t < T; ++t) stacked.block(t / R, (t % R) * D, 1, D) = x.row(t);

  Cache local;
  Cache& c = cache ? *cache : local;
  c.frames = T;
  Mat h = input.forward(store, stacked);
  c.stacked = std::move(stacked);
  c.blocks.resize(blocks.size());
  for (std::size_t b = 0; b < blocks.size(); ++b) h = blocks[b].forward(store, h, &c.blocks[b]);
  return final_ln.forward(store, h, &c.final_ln);
}

Mat Encoder::backward(const ParamStore& store, const Mat& g, const Cache& c, Gradients& grads) const {
  Mat gh = final_ln.backward(store, g, c.final_ln, grads);
  for (std::size_t b = blocks.size(); b-- > 0;) gh = blocks[b].backward(store, gh, c.blocks[b], grads);
  const Mat gs = input.backward(store, gh, c.stacked, grads);
  const int D = config.input_dim, R = config.subsampling;
  Mat gx(c.frames, D);
  for (int t = 0; t < c.frames; ++t) gx.row(t) = gs.block(t / R, (t % R) * D, 1, D);
  return gx;
}

// --- Decoder ---

Decoder::Decoder(ParamStore& store, const DecoderConfig& cfg, const std::string& name) : config(cfg) {
  embedding = store.add(name + ".embedding", {cfg.vocab, cfg.model_dim});
  for (int b = 0; b < cfg.blocks; ++b)
    blocks.emplace_back(store, name + ".block" + std::to_string(b), cfg.model_dim, cfg.heads, cfg.ff_dim);
  final_ln = LayerNorm(store, name + ".final_ln", cfg.model_dim);
  output = Linear(store, name + ".output", cfg.model_dim, cfg.vocab);
}

void Decoder::initialize(ParamStore& store, std::mt19937_64& rng) const {
  train::fill_normal(store.value(embedding), 1.0, rng);
  for (const auto& b : blocks) b.initialize(store, rng);
  final_ln.initialize(store);
  output.initialize(store, rng);
}

Mat Decoder::forward(const ParamStore& store, const std::vector<int>& tokens, const Mat& memory,
                     Cache* cache) const {
  const int L = static_cast<int>(tokens.size()), d = config.model_dim;
  if (L == 0) throw std::invalid_argument("empty decoder input");
  const auto E = as_mat(store.value(embedding), config.vocab, d);
  Mat x = sinusoidal_encoding(L, d);
  for (int i = 0; i < L; ++i) {
    if (tokens[i] < 0 || tokens[i] >= config.vocab) throw std::invalid_argument("token id out of range");
    x.row(i) += E.row(tokens[i]);
  }
  Cache local;
  Cache& c = cache ? *cache : local;
  c.tokens = tokens;
  c.blocks.resize(blocks.size());
  for (std::size_t b = 0; b < blocks.size(); ++b) x = blocks[b].forward(store, x, memory, &c.blocks[b]);
  c.normed = final_ln.forward(store, x, &c.final_ln);
  c.log_probs = log_softmax_rows(output.forward(store, c.normed));
  return c.log_probs;
}

void Decoder::backward(const ParamStore& store, const Mat& g_log_probs, const Cache& c, Gradients& grads,
                       Mat& g_memory) const {
  const Mat glogits = log_softmax_rows_backward(c.log_probs, g_log_probs);
  Mat gx = final_ln.backward(store, output.backward(store, glogits, c.normed, grads), c.final_ln, grads);
  for (std::size_t b = blocks.size(); b-- > 0;) gx = blocks[b].backward(store, gx, c.blocks[b], grads, g_memory);
  auto gE = as_mat(grads[embedding], config.vocab, config.model_dim);
  for (std::size_t i = 0; i < c.tokens.size(); ++i) gE.row(c.tokens[i]) += gx.row(i);
}

// --- losses ---

LossValue attention_decoder_loss(const ParamStore& store, const Decoder& decoder, const Mat& h,
                                 const std::vector<int>& target, int sos, int eos, Gradients* grads,
                                 double weight) {
  if (target.empty() || target.back() != eos) throw std::invalid_argument("target must end with eos");
  std::vector<int> input{sos};
  input.insert(input.end(), target.begin(), target.end() - 1);
  Decoder::Cache cache;
  const Mat logp = decoder.forward(store, input, h, &cache);
  LossValue r;
  Mat glogp = Mat::Zero(logp.rows(), logp.cols());
  for (std::size_t u = 0; u < target.size(); ++u) {
    if (target[u] < 0 || target[u] >= logp.cols()) throw std::invalid_argument("token id out of range");
    r.loss -= logp(u, target[u]);
    glogp(u, target[u]) = -weight;
  }
  r.grad = Mat::Zero(h.rows(), h.cols());
  if (grads) decoder.backward(store, glogp, cache, *grads, r.grad);
  return r;
}

double joint_loss(double ctc, double att, double lambda) {
  if (!(lambda >= 0.0 && lambda <= 1.0)) throw std::invalid_argument("lambda out of range");
  return lambda * ctc + (1.0 - lambda) * att;
}

// --- AsrModel ---

AsrModel::AsrModel(ParamStore& store, const AsrConfig& cfg)
    : config(cfg),
      encoder(store, cfg.encoder),
      decoder(store, cfg.decoder),
      ctc_head(store, "ctc.head", cfg.encoder.model_dim, cfg.decoder.vocab) {
  if (cfg.encoder.model_dim != cfg.decoder.model_dim)
    throw std::invalid_argument("encoder and decoder widths differ");
}

void AsrModel::initialize(ParamStore& store, std::mt19937_64& rng) const {
  encoder.initialize(store, rng);
  decoder.initialize(store, rng);
  ctc_head.initialize(store, rng);
}

Mat AsrModel::ctc_log_probs(const ParamStore& store, const Mat& h) const {
  return log_softmax_rows(ctc_head.forward(store, h));
}

LossBreakdown AsrModel::loss(const ParamStore& store, const Mat& features, const std::vector<int>& words,
                             Gradients* grads, Mat* g_features) const {
  const double lambda = config.ctc_weight;
  Encoder::Cache ecache;
  const Mat h = encoder.forward(store, features, &ecache);

  const Mat lp = ctc_log_probs(store, h);
  const CtcResult ctc = ctc_loss(lp, words, config.blank);

  std::vector<int> target = words;
  target.push_back(config.eos);
  const bool need_grad = grads || g_features;
  Gradients scratch;
  Gradients* g = grads;
  if (need_grad && !g) {
    scratch = Gradients(store);
    g = &scratch;
  }
  const LossValue att =
      attention_decoder_loss(store, decoder, h, target, config.sos, config.eos, g, 1.0 - lambda);

  LossBreakdown out{joint_loss(ctc.loss, att.loss, lambda), ctc.loss, att.loss};
  if (!need_grad) return out;

  Mat gh = att.grad;
  gh += ctc_head.backward(store, log_softmax_rows_backward(lp, lambda * ctc.grad), h, *g);
  Mat gf = encoder.backward(store, gh, ecache, *g);
  if (g_features) *g_features = std::move(gf);
  return out;
}

}  // namespace nbe2e::asr
