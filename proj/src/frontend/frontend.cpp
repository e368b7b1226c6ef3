#include "nbe2e/frontend/frontend.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "nbe2e/dsp/fbank.hpp"
#include "nbe2e/room/geometry.hpp"

namespace nbe2e::frontend {

using train::as_cmat;
using train::as_mat;

FrontendMode parse_frontend_mode(const std::string& name) {
  if (name == "max") return FrontendMode::kMaxPool;
  if (name == "projection") return FrontendMode::kProjection;
  if (name == "attention") return FrontendMode::kAttention;
  if (name == "dir_aware") return FrontendMode::kDirAware;
  if (name == "dir_attentive") return FrontendMode::kDirAttentive;
  throw std::invalid_argument("unknown frontend mode '" + name + "'");
}

std::string frontend_mode_name(FrontendMode mode) {
  switch (mode) {
    case FrontendMode::kMaxPool: return "max";
    case FrontendMode::kProjection: return "projection";
    case FrontendMode::kAttention: return "attention";
    case FrontendMode::kDirAware: return "dir_aware";
    case FrontendMode::kDirAttentive: return "dir_attentive";
  }
  return "?";
}

void FrontendConfig::validate() const {
  stft.validate();
  if (channels < 1 || directions < 1 || filters < 1 || output_dim < 1 || angle_bins < 1 || embedding_dim < 1 ||
      attention_dim < 1)
    throw std::invalid_argument("frontend dimensions must be positive");
  if (!(eps > 0.0)) throw std::invalid_argument("frontend eps must be positive");
}

int FrontendConfig::feature_dim() const {
  switch (mode) {
    case FrontendMode::kProjection:
    case FrontendMode::kDirAware: return output_dim;
    default: return filters;
  }
}

std::vector<double> FrontendConfig::look_directions() const {
  std::vector<double> az(directions);
  for (int p = 0; p < directions; ++p) az[p] = -180.0 + 360.0 * (p + 1) / directions;
  return az;
}

NeuralFrontend::NeuralFrontend(FrontendConfig config, train::ParamStore& store) : config_(std::move(config)) {
  config_.validate();
  const int P = config_.directions, C = config_.channels, F = config_.filters, K = config_.stft.bins();
  const int pf = P * F, D = config_.embedding_dim, A = config_.attention_dim;
  ids_.spatial = store.add("frontend.spatial", {P, C, K, 2});
  ids_.spectral = store.add("frontend.spectral", {spectral_directions(), F, K, 2});
  ids_.proj_weight = store.add("frontend.proj.weight", {config_.output_dim, pf});
  ids_.proj_bias = store.add("frontend.proj.bias", {config_.output_dim});
  ids_.attn_weight = store.add("frontend.attn.weight", {F, F});
  ids_.embedding = store.add("frontend.angle_embedding", {config_.angle_bins, D});
  ids_.aware_weight = store.add("frontend.aware.weight", {config_.output_dim, pf + D});
  ids_.aware_bias = store.add("frontend.aware.bias", {config_.output_dim});
  ids_.att_w0 = store.add("frontend.attentive.w0", {A, 2 * K});
  ids_.att_we = store.add("frontend.attentive.we", {A, D});
  ids_.att_v = store.add("frontend.attentive.v", {A});
}

int NeuralFrontend::spectral_directions() const {
  return config_.mode == FrontendMode::kDirAttentive ? 1 : config_.directions;
}

void NeuralFrontend::initialize(train::ParamStore& store, std::mt19937_64& rng) const {
  const auto& c = config_;
  const int P = c.directions, C = c.channels, F = c.filters, K = c.stft.bins(), N = c.stft.fft_size;
  const double two_pi = 2.0 * std::numbers::pi;

  // H: delay-and-sum steering vectors, e^{+j w tau} / C.
  auto H = as_cmat(store.value(ids_.spatial), static_cast<Eigen::Index>(P) * C, K);
  const auto geometry = room::ArrayGeometry::linear({}, C, c.init_spacing_m);
  const auto look = c.look_directions();
  for (int p = 0; p < P; ++p) {
    const auto tau = room::steering_delays(geometry, look[p], c.speed_of_sound);
    for (int ch = 0; ch < C; ++ch)
      for (int k = 0; k < K; ++k) {
        const double w = two_pi * k * c.sample_rate / N;
        H(p * C + ch, k) = std::polar(1.0 / C, w * tau[ch]);
      }
  }

  // S: mel-like bands with a linear phase that lines the band up on the
  // window centre.
  const dsp::MelFilterbank mel(F, N, c.sample_rate, 0.0, c.sample_rate / 2.0);
  const int Ps = spectral_directions();
  auto S = as_cmat(store.value(ids_.spectral), static_cast<Eigen::Index>(Ps) * F, K);
  const double n0 = c.stft.window_length / 2.0;
  for (int p = 0; p < Ps; ++p)
    for (int f = 0; f < F; ++f)
      for (int k = 0; k < K; ++k) S(p * F + f, k) = std::polar(mel.weights()(f, k), two_pi * k * n0 / N);

  std::normal_distribution<double> noise(0.0, c.init_noise);
  for (auto id : {ids_.spatial, ids_.spectral})
    for (double& v : store.value(id)) v += noise(rng);

  const int pf = P * F, D = c.embedding_dim;
  train::fill_glorot(store.value(ids_.proj_weight), pf, c.output_dim, rng);
  train::fill_glorot(store.value(ids_.aware_weight), pf + D, c.output_dim, rng);
  for (auto id : {ids_.proj_bias, ids_.aware_bias})
    for (double& v : store.value(id)) v = 0.0;
  train::fill_glorot(store.value(ids_.attn_weight), F, F, rng);
  train::fill_normal(store.value(ids_.embedding), 1.0, rng);
  // psi(Y) holds raw STFT values, so W0 starts small to keep tanh out of
  // saturation.
  train::fill_normal(store.value(ids_.att_w0), 1e-3, rng);
  train::fill_glorot(store.value(ids_.att_we), D, c.attention_dim, rng);
  train::fill_normal(store.value(ids_.att_v), 1.0 / std::sqrt(c.attention_dim), rng);
  store.touch();
}

Mat NeuralFrontend::forward(const train::ParamStore& store, const signal::ComplexSpectrogram& spec,
                            std::optional<double> azimuth_deg, Cache* cache, Backend backend) const {
  const auto& c = config_;
  if (spec.channels != c.channels || spec.bins != c.stft.bins())
    throw std::invalid_argument("spectrogram shape does not match frontend");
  if (uses_direction(c.mode) && !azimuth_deg) throw std::invalid_argument("missing azimuth");

  const int P = c.directions, C = c.channels, F = c.filters, K = c.stft.bins();
  const int pf = P * F, D = c.embedding_dim, A = c.attention_dim;
  Cache local;
  Cache& k = cache ? *cache : local;
  k.version = store.version();
  k.X = channel_matrices(spec);
  k.Y = spatial_filter(k.X, as_cmat(store.value(ids_.spatial), static_cast<Eigen::Index>(P) * C, K), backend);

  if (uses_direction(c.mode)) {
    k.bin = angle_bin(room::wrap_azimuth(*azimuth_deg), c.angle_bins);
    k.e = as_mat(store.value(ids_.embedding), c.angle_bins, D).row(k.bin);
  }

  if (c.mode == FrontendMode::kDirAttentive) {
    k.Ybar = direction_attentive(k.Y, k.e, as_mat(store.value(ids_.att_w0), A, 2 * K),
                                 as_mat(store.value(ids_.att_we), A, D),
                                 ConstVecMap(store.value(ids_.att_v).data(), A), &k.attentive);
    const std::vector<CMat> one{k.Ybar};
    return spectral_filter_logcompress(one, as_cmat(store.value(ids_.spectral), F, K), F, c.eps, &k.Z, backend);
  }

  k.O = spectral_filter_logcompress(k.Y, as_cmat(store.value(ids_.spectral), pf, K), F, c.eps, &k.Z, backend);
  const int out = c.output_dim;
  switch (c.mode) {
    case FrontendMode::kMaxPool: return pool_max(k.O, P, F, &k.max);
    case FrontendMode::kProjection:
      return pool_projection(k.O, as_mat(store.value(ids_.proj_weight), out, pf),
                             ConstVecMap(store.value(ids_.proj_bias).data(), out));
    case FrontendMode::kAttention:
      return pool_attention(k.O, P, F, as_mat(store.value(ids_.attn_weight), F, F), &k.attention);
    case FrontendMode::kDirAware:
      return direction_aware(k.O, k.e, as_mat(store.value(ids_.aware_weight), out, pf + D),
                             ConstVecMap(store.value(ids_.aware_bias).data(), out));
    default: break;
  }
  throw std::logic_error("unhandled frontend mode");
}

Mat NeuralFrontend::forward_wave(const train::ParamStore& store, const signal::MultichannelWaveform& wave,
                                 std::optional<double> azimuth_deg, Cache* cache, Backend backend) const {
  return forward(store, signal::stft(wave, config_.stft), azimuth_deg, cache, backend);
}

void NeuralFrontend::backward(const train::ParamStore& store, const Mat& g, const Cache& k, train::Gradients& grads,
                              Backend backend) const {
  if (k.version != store.version()) throw std::runtime_error("stale cache");
  const auto& c = config_;
  const int P = c.directions, C = c.channels, F = c.filters, K = c.stft.bins();
  const int pf = P * F, D = c.embedding_dim, A = c.attention_dim, out = c.output_dim;
  auto gH = as_cmat(grads[ids_.spatial], static_cast<Eigen::Index>(P) * C, K);

  RowVec ge = RowVec::Zero(D);
  std::vector<CMat> gY;
  if (c.mode == FrontendMode::kDirAttentive) {
    const std::vector<CMat> one{k.Ybar};
    auto gYbar = spectral_filter_logcompress_backward(g, one, as_cmat(store.value(ids_.spectral), F, K), k.Z, F,
                                                      c.eps, as_cmat(grads[ids_.spectral], F, K), backend);
    VecMap gv(grads[ids_.att_v].data(), A);
    gY = direction_attentive_backward(gYbar[0], k.Y, k.e, as_mat(store.value(ids_.att_w0), A, 2 * K),
                                      as_mat(store.value(ids_.att_we), A, D),
                                      ConstVecMap(store.value(ids_.att_v).data(), A), k.attentive,
                                      as_mat(grads[ids_.att_w0], A, 2 * K), as_mat(grads[ids_.att_we], A, D), gv,
                                      &ge);
  } else {
    Mat gO;
    switch (c.mode) {
      case FrontendMode::kMaxPool: gO = pool_max_backward(g, k.max, P, F); break;
      case FrontendMode::kProjection: {
        VecMap gb(grads[ids_.proj_bias].data(), out);
        gO = pool_projection_backward(g, k.O, as_mat(store.value(ids_.proj_weight), out, pf),
                                      as_mat(grads[ids_.proj_weight], out, pf), gb);
        break;
      }
      case FrontendMode::kAttention:
        gO = pool_attention_backward(g, k.O, P, F, as_mat(store.value(ids_.attn_weight), F, F), k.attention,
                                     as_mat(grads[ids_.attn_weight], F, F));
        break;
      case FrontendMode::kDirAware: {
        VecMap gb(grads[ids_.aware_bias].data(), out);
        gO = direction_aware_backward(g, k.O, k.e, as_mat(store.value(ids_.aware_weight), out, pf + D),
                                      as_mat(grads[ids_.aware_weight], out, pf + D), gb, &ge);
        break;
      }
      default: throw std::logic_error("unhandled frontend mode");
    }
    gY = spectral_filter_logcompress_backward(gO, k.Y, as_cmat(store.value(ids_.spectral), pf, K), k.Z, F, c.eps,
                                              as_cmat(grads[ids_.spectral], pf, K), backend);
  }
  if (uses_direction(c.mode)) as_mat(grads[ids_.embedding], c.angle_bins, D).row(k.bin) += ge;
  spatial_filter_backward(gY, k.X, gH, backend);
}

}  // namespace nbe2e::frontend
