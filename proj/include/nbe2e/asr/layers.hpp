#pragma once

#include <random>
#include <string>
#include <vector>

#include "nbe2e/linalg.hpp"
#include "nbe2e/train/param_store.hpp"

// Building blocks of the recognizer. Layers own only ParamIds; values and
// gradients live in the ParamStore / Gradients passed to every call, so the
// same layer object is shared by all worker threads.
namespace nbe2e::asr {

using train::Gradients;
using train::ParamId;
using train::ParamStore;

// Row-wise softmax / log-softmax and their backward passes.
Mat softmax_rows(const Mat& x);
Mat softmax_rows_backward(const Mat& y, const Mat& g);
Mat log_softmax_rows(const Mat& x);
Mat log_softmax_rows_backward(const Mat& y, const Mat& g);

// Standard sinusoidal table, [length x dim].
Mat sinusoidal_encoding(int length, int dim);

// Additive mask for causal self-attention: 0 on and below the diagonal,
// -inf above.
Mat causal_mask(int length);

struct AttentionCache {
  Mat probs;
};

// softmax(Q K^T / sqrt(d_k) + mask) V. An empty mask means none.
Mat scaled_dot_attention(const Mat& Q, const Mat& K, const Mat& V, const Mat& mask, AttentionCache* cache);
void scaled_dot_attention_backward(const Mat& g, const Mat& Q, const Mat& K, const Mat& V,
                                   const AttentionCache& cache, Mat& gQ, Mat& gK, Mat& gV);

class Linear {
 public:
  Linear() = default;
  Linear(ParamStore& store, const std::string& name, int in, int out);

  void initialize(ParamStore& store, std::mt19937_64& rng) const;
  Mat forward(const ParamStore& store, const Mat& x) const;
  // x is the forward input.
  Mat backward(const ParamStore& store, const Mat& g, const Mat& x, Gradients& grads) const;

  int in = 0, out = 0;
  ParamId weight = -1, bias = -1;
};

class LayerNorm {
 public:
  struct Cache {
    Mat xhat;
    Vec inv_std;
  };

  LayerNorm() = default;
  LayerNorm(ParamStore& store, const std::string& name, int dim);

  void initialize(ParamStore& store) const;
  Mat forward(const ParamStore& store, const Mat& x, Cache* cache) const;
  Mat backward(const ParamStore& store, const Mat& g, const Cache& cache, Gradients& grads) const;

  int dim = 0;
  double eps = 1e-5;
  ParamId gain = -1, bias = -1;
};

class MultiHeadAttention {
 public:
  struct Cache {
    Mat q_in, kv_in;
    Mat Q, K, V, context;
    std::vector<AttentionCache> heads;
  };

  MultiHeadAttention() = default;
  MultiHeadAttention(ParamStore& store, const std::string& name, int dim, int heads);

  void initialize(ParamStore& store, std::mt19937_64& rng) const;
  Mat forward(const ParamStore& store, const Mat& q_in, const Mat& kv_in, const Mat& mask, Cache* cache) const;
  // Gradients with respect to both inputs; for self-attention add them.
  void backward(const ParamStore& store, const Mat& g, const Cache& cache, Gradients& grads, Mat& g_q_in,
                Mat& g_kv_in) const;

  int dim = 0, heads = 1;
  Linear wq, wk, wv, wo;
};

class FeedForward {
 public:
  struct Cache {
    Mat x, hidden;  // hidden is post-ReLU
  };

  FeedForward() = default;
  FeedForward(ParamStore& store, const std::string& name, int dim, int hidden);

  void initialize(ParamStore& store, std::mt19937_64& rng) const;
  Mat forward(const ParamStore& store, const Mat& x, Cache* cache) const;
  Mat backward(const ParamStore& store, const Mat& g, const Cache& cache, Gradients& grads) const;

  Linear up, down;
};

// Pre-LN encoder block: x + MHA(LN(x)), then + FF(LN(.)).
class EncoderBlock {
 public:
  struct Cache {
    LayerNorm::Cache ln1, ln2;
    MultiHeadAttention::Cache attn;
    FeedForward::Cache ff;
  };

  EncoderBlock() = default;
  EncoderBlock(ParamStore& store, const std::string& name, int dim, int heads, int ff);

  void initialize(ParamStore& store, std::mt19937_64& rng) const;
  Mat forward(const ParamStore& store, const Mat& x, Cache* cache) const;
  Mat backward(const ParamStore& store, const Mat& g, const Cache& cache, Gradients& grads) const;

  LayerNorm ln1, ln2;
  MultiHeadAttention attn;
  FeedForward ff;
};

// Pre-LN decoder block: causal self-attention, cross-attention to the
// encoder output, feed-forward.
class DecoderBlock {
 public:
  struct Cache {
    LayerNorm::Cache ln1, ln2, ln3;
    MultiHeadAttention::Cache self, cross;
    FeedForward::Cache ff;
  };

  DecoderBlock() = default;
  DecoderBlock(ParamStore& store, const std::string& name, int dim, int heads, int ff);

  void initialize(ParamStore& store, std::mt19937_64& rng) const;
  Mat forward(const ParamStore& store, const Mat& x, const Mat& memory, Cache* cache) const;
  // Returns dL/dx and accumulates dL/dmemory into g_memory.
  Mat backward(const ParamStore& store, const Mat& g, const Cache& cache, Gradients& grads, Mat& g_memory) const;

  LayerNorm ln1, ln2, ln3;
  MultiHeadAttention self_attn, cross_attn;
  FeedForward ff;
};

}  // namespace nbe2e::asr
