#include "nbe2e/train/system.hpp"

#include <cmath>
#include <cstdio>
#include <stdexcept>

#include "nbe2e/signal/wav.hpp"

namespace nbe2e::train {

Corpus Corpus::load(const std::filesystem::path& manifest) {
  Corpus c;
  c.manifest = manifest;
  c.records = room::read_manifest(manifest);
  return c;
}

std::filesystem::path Corpus::wav_path(int index) const {
  return manifest.parent_path() / records.at(index).path;
}

Recognizer::Recognizer(SystemConfig config, const asr::Vocabulary& vocab)
    : config_(std::move(config)), vocab_(vocab) {
  int dim = config_.dsp.num_filters;
  if (neural()) {
    frontend_.emplace(config_.frontend, store_);
    dim = config_.frontend.feature_dim();
  }
  norm_mean_ = store_.add("normalizer.mean", {dim}, false);
  norm_inv_std_ = store_.add("normalizer.inv_std", {dim}, false);
  config_.asr.encoder.input_dim = dim;
  config_.asr.decoder.vocab = vocab_.size();
  config_.asr.blank = asr::Vocabulary::kBlank;
  config_.asr.sos = asr::Vocabulary::kSos;
  config_.asr.eos = asr::Vocabulary::kEos;
  model_ = asr::AsrModel(store_, config_.asr);
}

void Recognizer::initialize(std::uint64_t seed, const Corpus& corpus, const InputOptions& inputs,
                            int calibration) {
  std::mt19937_64 rng(seed);
  if (frontend_) frontend_->initialize(store_, rng);
  model_.initialize(store_, rng);

  auto mean = store_.value(norm_mean_);
  auto inv = store_.value(norm_inv_std_);
  std::fill(mean.begin(), mean.end(), 0.0);
  std::fill(inv.begin(), inv.end(), 1.0);
  store_.touch();

  const int n = std::min(calibration, corpus.size());
  const auto dim = static_cast<Eigen::Index>(mean.size());
  Vec sum = Vec::Zero(dim), sq = Vec::Zero(dim);
  double frames = 0.0;
  for (int i = 0; i < n; ++i) {
    const Mat f = features(load(corpus, i, inputs));
    sum += f.colwise().sum().transpose();
    sq += f.array().square().matrix().colwise().sum().transpose();
    frames += static_cast<double>(f.rows());
  }
  if (frames > 0.0) {
    const Vec m = sum / frames;
    const Vec var = (sq / frames - m.cwiseProduct(m)).cwiseMax(0.0);
    for (Eigen::Index d = 0; d < dim; ++d) {
      mean[d] = m(d);
      inv[d] = 1.0 / std::sqrt(var(d) + 1e-8);
    }
  }
  store_.touch();
}

Utterance Recognizer::load(const Corpus& corpus, int index, const InputOptions& inputs) const {
  const auto& rec = corpus.records.at(index);
  Utterance u;
  u.id = rec.id;
  u.words = vocab_.encode(rec.transcript);

  if (neural()) {
    u.wave = signal::read_wav(corpus.wav_path(index));
    if (frontend::uses_direction(config_.frontend.mode)) {
      auto rng = room::utterance_rng(inputs.seed, "prior:" + rec.id, 0);
      const double d = inputs.prior_perturb_deg;
      const double jitter = d > 0.0 ? std::uniform_real_distribution<double>(-d, d)(rng) : 0.0;
      u.azimuth_deg = room::wrap_azimuth(rec.azimuth_deg + jitter);
    }
    return u;
  }

  char tag[64];
  std::snprintf(tag, sizeof(tag), "doa_%.4f_seed%llu", inputs.doa_error_rate,
                static_cast<unsigned long long>(inputs.seed));
  std::filesystem::path cached;
  if (!inputs.cache_dir.empty()) {
    cached = inputs.cache_dir / tag / (rec.id + ".feat");
    if (std::filesystem::exists(cached)) {
      u.features = dsp::read_feature_cache(cached);
      return u;
    }
  }
  const auto wave = signal::read_wav(corpus.wav_path(index));
  const auto geometry = room::ArrayGeometry::linear({}, static_cast<int>(wave.num_channels()), rec.spacing_m);
  const auto bank = dsp::LookDirectionBank::make(geometry, dsp::LookDirectionBank::default_directions(),
                                                 config_.dsp.speed_of_sound);
  auto rng = room::utterance_rng(inputs.seed, std::string("doa:") + tag + ":" + rec.id, 0);
  // Round through float so cached and freshly computed features agree.
  u.features = dsp::dsp_frontend(wave, geometry, bank, inputs.doa_error_rate, rng, config_.dsp)
                   .cast<float>()
                   .cast<double>();
  if (!cached.empty()) {
    std::filesystem::create_directories(cached.parent_path());
    const auto tmp = cached.string() + ".tmp";
    dsp::write_feature_cache(tmp, u.features);
    std::filesystem::rename(tmp, cached);
  }
  return u;
}

Mat Recognizer::features(const Utterance& u) const {
  const Mat raw = neural() ? frontend_->forward_wave(store_, u.wave, u.azimuth_deg, nullptr) : u.features;
  const auto dim = raw.cols();
  const RowVec mean = ConstVecMap(store_.value(norm_mean_).data(), dim).transpose();
  const RowVec inv = ConstVecMap(store_.value(norm_inv_std_).data(), dim).transpose();
  return (raw.rowwise() - mean).array().rowwise() * inv.array();
}

asr::LossBreakdown Recognizer::loss(const Utterance& u, Gradients* grads) const {
  if (!neural() || !grads) return model_.loss(store_, features(u), u.words, grads, nullptr);

  frontend::NeuralFrontend::Cache cache;
  const Mat raw = frontend_->forward_wave(store_, u.wave, u.azimuth_deg, &cache);
  const auto dim = raw.cols();
  const RowVec mean = ConstVecMap(store_.value(norm_mean_).data(), dim).transpose();
  const RowVec inv = ConstVecMap(store_.value(norm_inv_std_).data(), dim).transpose();
  const Mat feats = (raw.rowwise() - mean).array().rowwise() * inv.array();
  Mat g;
  const auto out = model_.loss(store_, feats, u.words, grads, &g);
  g.array().rowwise() *= inv.array();
  frontend_->backward(store_, g, cache, *grads);
  return out;
}

asr::BeamOptions Recognizer::beam_options(int beam, int max_len) const {
  asr::BeamOptions o;
  o.beam = beam;
  o.max_len = max_len;
  o.sos = asr::Vocabulary::kSos;
  o.eos = asr::Vocabulary::kEos;
  o.excluded = {asr::Vocabulary::kBlank, asr::Vocabulary::kSos, asr::Vocabulary::kPad};
  return o;
}

asr::Hypothesis Recognizer::decode(const Utterance& u, const asr::BeamOptions& options) const {
  const Mat h = model_.encoder.forward(store_, features(u), nullptr);
  return asr::beam_search_decode(store_, model_.decoder, h, options);
}

}  // namespace nbe2e::train
