#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "tcft/tensor.hpp"

namespace tcft {

class Rng;

struct NamedTensor {
  std::string name;
  Tensor tensor;
};
using ParameterList = std::vector<NamedTensor>;

// A batch of equal-length sequences stored sample-major: row b*steps + t
// holds the features of sample b at time t.
struct SequenceBatch {
  Tensor data;  // [batch*steps x features]
  std::size_t batch = 1;
  std::size_t steps = 1;

  std::size_t features() const { return data.cols(); }
};

struct ForwardMode {
  bool training = false;
  Rng* rng = nullptr;  // required when training with dropout
};

std::size_t parameter_count(const ParameterList& params);

class Dense {
 public:
  Dense() = default;
  Dense(std::size_t in, std::size_t out);

  Tensor forward(const Tensor& x) const;
  void collect(const std::string& prefix, ParameterList& out) const;

  std::size_t in_features() const { return weight.rows(); }
  std::size_t out_features() const { return weight.cols(); }

  Tensor weight;  // [in x out]
  Tensor bias;    // [out]
};

// One dilated causal convolution layer:
//   y(t) = sum_{i<k} w(i) . x(t - d*i) + b, with x(t) = 0 for t < 0.
// Weight layout is (out_channels, in_channels, kernel); tap i multiplies lag d*i.
class CausalConv1d {
 public:
  CausalConv1d() = default;
  CausalConv1d(std::size_t in_channels, std::size_t out_channels, std::size_t kernel,
               std::size_t dilation);

  SequenceBatch forward(const SequenceBatch& x) const;
  void collect(const std::string& prefix, ParameterList& out) const;

  std::size_t in_channels() const { return weight.shape()[1]; }
  std::size_t out_channels() const { return weight.shape()[0]; }
  std::size_t kernel() const { return weight.shape()[2]; }
  std::size_t dilation() const { return dilation_; }

  Tensor weight;  // [out x in x kernel]
  Tensor bias;    // [out]

 private:
  std::size_t dilation_ = 1;
};

// ReLU(conv_output + skip). The skip path goes through `projection` (a 1x1
// convolution) when channel counts differ.
SequenceBatch tcn_residual(const SequenceBatch& x, const SequenceBatch& conv_output,
                           const Dense* projection = nullptr);

// Stack of dilated causal conv layers, each wrapped in a residual connection.
class TcnBlock {
 public:
  TcnBlock() = default;
  TcnBlock(std::size_t in_channels, std::size_t filters, std::size_t kernel,
           const std::vector<std::size_t>& dilations);

  SequenceBatch forward(const SequenceBatch& x) const;
  // Output of every layer, for causality probes.
  std::vector<SequenceBatch> forward_layers(const SequenceBatch& x) const;
  void collect(const std::string& prefix, ParameterList& out) const;

  std::size_t filters() const { return layers.front().out_channels(); }
  std::size_t receptive_field() const;

  std::vector<CausalConv1d> layers;
  std::optional<Dense> projection;  // first layer skip path when in_channels != filters
};

// Gate order is (input, forget, output, candidate) everywhere: checkpoints
// name the tensors W_i, W_f, W_o, W_c, U_*, b_*.
struct LstmParams {
  LstmParams() = default;
  LstmParams(std::size_t input_size, std::size_t hidden);

  std::size_t input_size() const { return W_i.rows(); }
  std::size_t hidden() const { return U_i.rows(); }
  void collect(const std::string& prefix, ParameterList& out) const;

  Tensor W_i, W_f, W_o, W_c;  // [input x hidden]
  Tensor U_i, U_f, U_o, U_c;  // [hidden x hidden]
  Tensor b_i, b_f, b_o, b_c;  // [hidden]
};

struct LstmState {
  Tensor h;  // [batch x hidden]
  Tensor c;  // [batch x hidden]
};

// i = s(xW_i + hU_i + b_i), f = s(...), o = s(...), c~ = tanh(...),
// c' = f*c + i*c~, h' = o*tanh(c').
LstmState lstm_step(const Tensor& x_t, const LstmState& prev, const LstmParams& p);

// Runs the recurrence over every step (reversed in time when `reverse`), from
// zero state, and returns hidden states aligned to the input timesteps.
SequenceBatch lstm_sequence(const SequenceBatch& x, const LstmParams& p, bool reverse = false);

// Per-timestep concatenation [forward h_t ; backward h_t].
SequenceBatch bilstm_forward(const SequenceBatch& x, const LstmParams& fwd, const LstmParams& bwd);
// Single-sequence convenience: x is [T x in], result [T x 2*hidden].
Tensor bilstm_forward(const Tensor& x, const LstmParams& fwd, const LstmParams& bwd);

// sigmoid(x W_g) * x.
Tensor gated_output(const Tensor& x, const Tensor& gate_weight);

// Row index helpers for the sample-major layout.
std::vector<std::ptrdiff_t> timestep_rows(std::size_t batch, std::size_t steps, std::size_t t);
std::vector<std::ptrdiff_t> last_step_rows(std::size_t batch, std::size_t steps);

// Causal conv on a single [channels x T] sequence, returning [filters x T].
Tensor causal_conv1d(const Tensor& x, const CausalConv1d& layer);

}  // namespace tcft
