#include "tcft/attention.hpp"

#include <cmath>

#include "tcft/errors.hpp"
#include "tcft/ops.hpp"

namespace tcft {

MultiHeadAttention::MultiHeadAttention(std::size_t d_model, std::size_t heads)
    : query(d_model, d_model), key(d_model, d_model), value(d_model, d_model),
      output(d_model, d_model), heads_(heads) {
  if (heads == 0 || d_model % heads != 0) {
    throw ConfigError("attention width " + std::to_string(d_model) +
                      " is not divisible by " + std::to_string(heads) + " heads");
  }
}

SequenceBatch MultiHeadAttention::forward(const SequenceBatch& x) const {
  if (x.features() != d_model()) {
    throw DimensionError("attention expects width " + std::to_string(d_model()) + ", got " +
                         std::to_string(x.features()));
  }
  const std::size_t B = x.batch, T = x.steps, dk = d_k();
  const Tensor Q = query.forward(x.data);
  const Tensor K = key.forward(x.data);
  const Tensor V = value.forward(x.data);
  const double inv_sqrt_dk = 1.0 / std::sqrt(static_cast<double>(dk));

  weights_.assign(B * heads_, {});
  std::vector<Tensor> samples;
  samples.reserve(B);
  std::vector<Tensor> head_out(heads_);
  for (std::size_t b = 0; b < B; ++b) {
    for (std::size_t h = 0; h < heads_; ++h) {
      const Tensor q = slice(Q, b * T, T, h * dk, dk);
      const Tensor k = slice(K, b * T, T, h * dk, dk);
      const Tensor v = slice(V, b * T, T, h * dk, dk);
      const Tensor a = softmax(scale(matmul(q, transpose(k)), inv_sqrt_dk), 1);
      weights_[b * heads_ + h].assign(a.values().begin(), a.values().end());
      head_out[h] = matmul(a, v);
    }
    samples.push_back(heads_ == 1 ? head_out[0] : concat_cols(head_out));
  }
  const Tensor joined = B == 1 ? samples[0] : concat_rows(samples);
  return {output.forward(joined), B, T};
}

void MultiHeadAttention::collect(const std::string& prefix, ParameterList& out) const {
  query.collect(prefix + ".query", out);
  key.collect(prefix + ".key", out);
  value.collect(prefix + ".value", out);
  output.collect(prefix + ".output", out);
}

Tensor multi_head_attention(const Tensor& x, const MultiHeadAttention& mha) {
  return mha.forward(SequenceBatch{x, 1, x.rows()}).data;
}

// ---------------------------------------------------------------------------

GatedAttentionBlock::GatedAttentionBlock(std::size_t d_model, std::size_t heads, double rate)
    : attention(d_model, heads), feed_forward(d_model, d_model),
      gate(Tensor::zeros({d_model, d_model}, true)),
      ln_gain(Tensor::full({d_model}, 1.0, true)), ln_bias(Tensor::zeros({d_model}, true)),
      dropout(rate) {}

SequenceBatch GatedAttentionBlock::forward(const SequenceBatch& x, const ForwardMode& mode) const {
  const auto attended = attention.forward(x);
  const Tensor dropped = tcft::dropout(attended.data, dropout, mode.training, mode.rng);
  const Tensor ff = feed_forward.forward(dropped);
  const Tensor gated = gated_output(ff, gate);
  return {layer_norm(gated, ln_gain, ln_bias), x.batch, x.steps};
}

void GatedAttentionBlock::collect(const std::string& prefix, ParameterList& out) const {
  attention.collect(prefix + ".mha", out);
  feed_forward.collect(prefix + ".ff", out);
  out.push_back({prefix + ".W_g", gate});
  out.push_back({prefix + ".ln.gain", ln_gain});
  out.push_back({prefix + ".ln.bias", ln_bias});
}

Tensor gated_attention_block(const Tensor& x, const GatedAttentionBlock& block, bool training,
                             Rng* rng) {
  return block.forward(SequenceBatch{x, 1, x.rows()}, ForwardMode{training, rng}).data;
}

SequenceBatch FeedForwardMixer::forward(const SequenceBatch& x) const {
  return {relu(layer.forward(x.data)), x.batch, x.steps};
}

// ---------------------------------------------------------------------------

StaticEnrichment::StaticEnrichment(std::size_t raw_channels, std::size_t d)
    : context(raw_channels, d), hidden(d, d), context_weight(Tensor::zeros({d, d}, true)),
      mix(d, d), gate(d, d), value(d, d), ln_gain(Tensor::full({d}, 1.0, true)),
      ln_bias(Tensor::zeros({d}, true)) {}

SequenceBatch StaticEnrichment::forward(const SequenceBatch& x, const SequenceBatch& raw) const {
  const std::size_t B = x.batch, T = x.steps;
  // Per-sample time average of the raw window via an averaging matrix.
  std::vector<double> avg(B * B * T, 0.0);
  for (std::size_t b = 0; b < B; ++b)
    for (std::size_t t = 0; t < T; ++t) avg[b * B * T + b * T + t] = 1.0 / static_cast<double>(T);
  const Tensor pooled = matmul(Tensor::from({B, B * T}, std::move(avg)), raw.data);
  const Tensor c = matmul(context.forward(pooled), context_weight);  // [B x d]
  std::vector<std::ptrdiff_t> repeat(B * T);
  for (std::size_t b = 0; b < B; ++b)
    for (std::size_t t = 0; t < T; ++t) repeat[b * T + t] = static_cast<std::ptrdiff_t>(b);
  const Tensor eta2 = elu(add(hidden.forward(x.data), gather_rows(c, repeat)));
  const Tensor eta1 = mix.forward(eta2);
  const Tensor glu = mul(sigmoid(gate.forward(eta1)), value.forward(eta1));
  return {layer_norm(add(x.data, glu), ln_gain, ln_bias), B, T};
}

void StaticEnrichment::collect(const std::string& prefix, ParameterList& out) const {
  context.collect(prefix + ".context", out);
  hidden.collect(prefix + ".hidden", out);
  out.push_back({prefix + ".W_context", context_weight});
  mix.collect(prefix + ".mix", out);
  gate.collect(prefix + ".glu_gate", out);
  value.collect(prefix + ".glu_value", out);
  out.push_back({prefix + ".ln.gain", ln_gain});
  out.push_back({prefix + ".ln.bias", ln_bias});
}

}  // namespace tcft
