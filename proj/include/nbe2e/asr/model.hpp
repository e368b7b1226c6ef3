#pragma once

#include <random>
#include <string>
#include <vector>

#include "nbe2e/asr/layers.hpp"

namespace nbe2e::asr {

struct EncoderConfig {
  int input_dim = 40;
  int model_dim = 64;
  int heads = 4;
  int ff_dim = 128;
  int blocks = 7;
  int subsampling = 4;
};

struct DecoderConfig {
  int vocab = 16;
  int model_dim = 64;
  int heads = 4;
  int ff_dim = 128;
  int blocks = 2;
};

// ceil(frames / factor)
inline int subsampled_length(int frames, int factor) { return (frames + factor - 1) / factor; }

// Positional encoding on the input features, frame stacking by the
// subsampling factor (zero padded at the end), a linear projection to the
// model width, the blocks and a final layer norm.
class Encoder {
 public:
  struct Cache {
    int frames = 0;
    Mat stacked;
    std::vector<EncoderBlock::Cache> blocks;
    LayerNorm::Cache final_ln;
  };

  Encoder() = default;
  Encoder(ParamStore& store, const EncoderConfig& config, const std::string& name = "encoder");

  void initialize(ParamStore& store, std::mt19937_64& rng) const;
  // features [T x input_dim] -> h [ceil(T / subsampling) x model_dim]
  Mat forward(const ParamStore& store, const Mat& features, Cache* cache) const;
  // Returns dL/dfeatures.
  Mat backward(const ParamStore& store, const Mat& g, const Cache& cache, Gradients& grads) const;

  EncoderConfig config;
  Linear input;
  std::vector<EncoderBlock> blocks;
  LayerNorm final_ln;
};

// Token embedding plus positional encoding, causal blocks attending to the
// encoder output, final layer norm and a log-softmax output layer.
class Decoder {
 public:
  struct Cache {
    std::vector<int> tokens;
    std::vector<DecoderBlock::Cache> blocks;
    LayerNorm::Cache final_ln;
    Mat normed;
    Mat log_probs;
  };

  Decoder() = default;
  Decoder(ParamStore& store, const DecoderConfig& config, const std::string& name = "decoder");

  void initialize(ParamStore& store, std::mt19937_64& rng) const;
  // Input tokens [L] -> next-token log-probabilities [L x vocab].
  Mat forward(const ParamStore& store, const std::vector<int>& tokens, const Mat& memory, Cache* cache) const;
  // Accumulates dL/dmemory into g_memory.
  void backward(const ParamStore& store, const Mat& g_log_probs, const Cache& cache, Gradients& grads,
                Mat& g_memory) const;

  DecoderConfig config;
  ParamId embedding = -1;
  std::vector<DecoderBlock> blocks;
  LayerNorm final_ln;
  Linear output;
};

struct LossValue {
  double loss = 0.0;
  Mat grad;  // gradient with respect to the scored input
};

// Teacher-forced cross-entropy -sum_u log P(y_u | h, y_<u). target must end
// with eos; the decoder reads sos followed by target without its last token.
// When grads is given, weight * dL/dparams is accumulated there and grad holds
// weight * dL/dh.
LossValue attention_decoder_loss(const ParamStore& store, const Decoder& decoder, const Mat& h,
                                 const std::vector<int>& target, int sos, int eos, Gradients* grads,
                                 double weight = 1.0);

// lambda * ctc + (1 - lambda) * att; lambda must lie in [0, 1].
double joint_loss(double ctc, double att, double lambda);

struct AsrConfig {
  EncoderConfig encoder;
  DecoderConfig decoder;
  double ctc_weight = 0.1;
  int blank = 0;
  int sos = 1;
  int eos = 2;
};

struct LossBreakdown {
  double theta = 0.0;
  double ctc = 0.0;
  double att = 0.0;
};

class AsrModel {
 public:
  AsrModel() = default;
  AsrModel(ParamStore& store, const AsrConfig& config);

  void initialize(ParamStore& store, std::mt19937_64& rng) const;

  // Joint loss on one utterance. words excludes sos/eos. When grads is given
  // parameter gradients are accumulated; when g_features is given it
  // receives dtheta/dfeatures.
  LossBreakdown loss(const ParamStore& store, const Mat& features, const std::vector<int>& words,
                     Gradients* grads, Mat* g_features) const;

  // CTC log-probabilities from encoder output.
  Mat ctc_log_probs(const ParamStore& store, const Mat& h) const;

  AsrConfig config;
  Encoder encoder;
  Decoder decoder;
  Linear ctc_head;
};

}  // namespace nbe2e::asr
