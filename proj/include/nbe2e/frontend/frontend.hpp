#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "nbe2e/frontend/ops.hpp"
#include "nbe2e/linalg.hpp"
#include "nbe2e/signal/stft.hpp"
#include "nbe2e/signal/waveform.hpp"
#include "nbe2e/train/param_store.hpp"

namespace nbe2e::frontend {

enum class FrontendMode { kMaxPool, kProjection, kAttention, kDirAware, kDirAttentive };

// "max", "projection", "attention", "dir_aware", "dir_attentive"
FrontendMode parse_frontend_mode(const std::string& name);
std::string frontend_mode_name(FrontendMode mode);
inline bool uses_direction(FrontendMode m) {
  return m == FrontendMode::kDirAware || m == FrontendMode::kDirAttentive;
}

struct FrontendConfig {
  FrontendMode mode = FrontendMode::kProjection;
  signal::StftConfig stft;
  int channels = 2;
  int directions = 10;
  int filters = 40;
  int output_dim = 40;  // projection width for projection / dir_aware
  int angle_bins = 36;
  int embedding_dim = 16;
  int attention_dim = 32;
  double eps = 1e-7;
  double sample_rate = 16000.0;

  // Steering-vector initialisation of H.
  double init_spacing_m = 0.04;
  double speed_of_sound = 343.0;
  double init_noise = 0.01;

  void validate() const;
  // Frame dimension produced in this mode.
  int feature_dim() const;
  // Azimuths of the initial look directions, equally spaced in (-180, 180].
  std::vector<double> look_directions() const;
};

// Spatial filtering, fCLP spectral filtering and one pooling / direction
// module. All parameter blocks of every mode are registered so the unused
// ones simply receive zero gradient; the spectral bank has one direction in
// dir_attentive mode, where beams are merged before spectral filtering.
class NeuralFrontend {
 public:
  struct Ids {
    train::ParamId spatial, spectral;
    train::ParamId proj_weight, proj_bias;
    train::ParamId attn_weight;
    train::ParamId embedding;
    train::ParamId aware_weight, aware_bias;
    train::ParamId att_w0, att_we, att_v;
  };

  struct Cache {
    std::uint64_t version = 0;
    std::vector<CMat> X, Y, Z;
    CMat Ybar;
    Mat O;
    MaxPoolCache max;
    AttentionPoolCache attention;
    DirectionAttentiveCache attentive;
    int bin = -1;
    RowVec e;
  };

  NeuralFrontend(FrontendConfig config, train::ParamStore& store);

  const FrontendConfig& config() const { return config_; }
  const Ids& ids() const { return ids_; }

  void initialize(train::ParamStore& store, std::mt19937_64& rng) const;

  // Throws std::invalid_argument("missing azimuth") in direction modes
  // without one.
  Mat forward(const train::ParamStore& store, const signal::ComplexSpectrogram& X,
              std::optional<double> azimuth_deg, Cache* cache, Backend backend = Backend::kParallel) const;
  Mat forward_wave(const train::ParamStore& store, const signal::MultichannelWaveform& wave,
                   std::optional<double> azimuth_deg, Cache* cache, Backend backend = Backend::kParallel) const;

  // Accumulates parameter gradients for upstream gradient g [T x feature_dim].
  // Throws std::runtime_error("stale cache") if the parameters changed since
  // the forward pass.
  void backward(const train::ParamStore& store, const Mat& g, const Cache& cache, train::Gradients& grads,
                Backend backend = Backend::kParallel) const;

 private:
  int spectral_directions() const;

  FrontendConfig config_;
  Ids ids_{};
};

}  // namespace nbe2e::frontend
