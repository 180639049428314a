#pragma once

#include <cstddef>
#include <vector>

#include "tcft/layers.hpp"

namespace tcft {

// Self-attention with `heads` heads over d_model = heads * d_k features.
class MultiHeadAttention {
 public:
  MultiHeadAttention() = default;
  MultiHeadAttention(std::size_t d_model, std::size_t heads);

  SequenceBatch forward(const SequenceBatch& x) const;
  void collect(const std::string& prefix, ParameterList& out) const;

  std::size_t heads() const { return heads_; }
  std::size_t d_model() const { return query.in_features(); }
  std::size_t d_k() const { return d_model() / heads_; }

  // Softmax weights from the last forward, one [steps x steps] row-major
  // matrix per (sample, head), indexed sample * heads + head.
  const std::vector<std::vector<double>>& attention_weights() const { return weights_; }

  Dense query, key, value, output;

 private:
  std::size_t heads_ = 1;
  mutable std::vector<std::vector<double>> weights_;
};

// Single-sequence convenience: x is [T x d_model].
Tensor multi_head_attention(const Tensor& x, const MultiHeadAttention& mha);

// attention -> dropout -> feed-forward -> sigmoid gate -> layer norm.
class GatedAttentionBlock {
 public:
  GatedAttentionBlock() = default;
  GatedAttentionBlock(std::size_t d_model, std::size_t heads, double dropout);

  SequenceBatch forward(const SequenceBatch& x, const ForwardMode& mode) const;
  void collect(const std::string& prefix, ParameterList& out) const;

  MultiHeadAttention attention;
  Dense feed_forward;
  Tensor gate;     // W_g [d x d]
  Tensor ln_gain;  // [d], initialized to 1
  Tensor ln_bias;  // [d]
  double dropout = 0.0;
};

Tensor gated_attention_block(const Tensor& x, const GatedAttentionBlock& block, bool training,
                             Rng* rng = nullptr);

// Stand-in for the attention block in the feed-forward ablation: ReLU(xW + b)
// with matching input and output width.
class FeedForwardMixer {
 public:
  FeedForwardMixer() = default;
  explicit FeedForwardMixer(std::size_t d_model) : layer(d_model, d_model) {}

  SequenceBatch forward(const SequenceBatch& x) const;
  void collect(const std::string& prefix, ParameterList& out) const { layer.collect(prefix, out); }

  Dense layer;
};

// Gated residual network conditioned on a per-sample static context, as used
// by the static-enrichment stage of the original TFT. C-MAPSS carries no
// static covariates, so the context is encoded from the time-averaged raw
// input window.
class StaticEnrichment {
 public:
  StaticEnrichment() = default;
  StaticEnrichment(std::size_t raw_channels, std::size_t d_model);

  SequenceBatch forward(const SequenceBatch& x, const SequenceBatch& raw) const;
  void collect(const std::string& prefix, ParameterList& out) const;

  Dense context;   // raw channels -> d
  Dense hidden;    // a -> d (W2, b2)
  Tensor context_weight;  // W3 [d x d]
  Dense mix;       // W1, b1
  Dense gate;      // GLU gate W4, b4
  Dense value;     // GLU value W5, b5
  Tensor ln_gain, ln_bias;
};

}  // namespace tcft
