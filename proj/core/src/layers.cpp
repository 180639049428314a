#include "tcft/layers.hpp"

#include <numeric>

#include "tcft/errors.hpp"
#include "tcft/ops.hpp"

namespace tcft {

namespace {
Tensor param(Shape shape) { return Tensor::zeros(std::move(shape), true); }
}  // namespace

std::size_t parameter_count(const ParameterList& params) {
  std::size_t n = 0;
  for (const auto& p : params) n += p.tensor.size();
  return n;
}

std::vector<std::ptrdiff_t> timestep_rows(std::size_t batch, std::size_t steps, std::size_t t) {
  std::vector<std::ptrdiff_t> rows(batch);
  for (std::size_t b = 0; b < batch; ++b) rows[b] = static_cast<std::ptrdiff_t>(b * steps + t);
  return rows;
}

std::vector<std::ptrdiff_t> last_step_rows(std::size_t batch, std::size_t steps) {
  return timestep_rows(batch, steps, steps - 1);
}

// ---------------------------------------------------------------------------

Dense::Dense(std::size_t in, std::size_t out) : weight(param({in, out})), bias(param({out})) {}

Tensor Dense::forward(const Tensor& x) const { return affine(x, weight, bias); }

void Dense::collect(const std::string& prefix, ParameterList& out) const {
  out.push_back({prefix + ".weight", weight});
  out.push_back({prefix + ".bias", bias});
}

// ---------------------------------------------------------------------------

CausalConv1d::CausalConv1d(std::size_t in_channels, std::size_t out_channels, std::size_t kernel,
                           std::size_t dilation)
    : weight(param({out_channels, in_channels, kernel})), bias(param({out_channels})),
      dilation_(dilation) {
  if (kernel < 1) throw ConfigError("kernel size must be at least 1");
  if (dilation < 1) throw ConfigError("dilation must be at least 1");
}

SequenceBatch CausalConv1d::forward(const SequenceBatch& x) const {
  const std::size_t C = in_channels(), F = out_channels(), k = kernel();
  if (x.features() != C) {
    throw DimensionError("causal conv expects " + std::to_string(C) + " input channels, got " +
                         std::to_string(x.features()));
  }
  const std::size_t B = x.batch, T = x.steps;
  std::vector<Tensor> taps;
  taps.reserve(k);
  std::vector<std::ptrdiff_t> idx(B * T);
  for (std::size_t i = 0; i < k; ++i) {
    const std::size_t lag = dilation_ * i;
    for (std::size_t b = 0; b < B; ++b)
      for (std::size_t t = 0; t < T; ++t)
        idx[b * T + t] = t >= lag ? static_cast<std::ptrdiff_t>(b * T + t - lag) : -1;
    taps.push_back(i == 0 ? x.data : gather_rows(x.data, idx));
  }
  const Tensor stacked = k == 1 ? taps[0] : concat_cols(taps);

  // Rearrange (out, in, k) into the [k*in x out] matrix matching the tap blocks.
  std::vector<std::size_t> order(k * C * F);
  for (std::size_t i = 0; i < k; ++i)
    for (std::size_t c = 0; c < C; ++c)
      for (std::size_t o = 0; o < F; ++o) order[(i * C + c) * F + o] = o * C * k + c * k + i;
  const Tensor w = take(weight, order, {k * C, F});
  return {affine(stacked, w, bias), B, T};
}

void CausalConv1d::collect(const std::string& prefix, ParameterList& out) const {
  out.push_back({prefix + ".weight", weight});
  out.push_back({prefix + ".bias", bias});
}

Tensor causal_conv1d(const Tensor& x, const CausalConv1d& layer) {
  if (x.dim() != 2) throw DimensionError("causal_conv1d expects [channels x T]");
  const SequenceBatch seq{transpose(x), 1, x.cols()};
  return transpose(layer.forward(seq).data);
}

SequenceBatch tcn_residual(const SequenceBatch& x, const SequenceBatch& conv_output,
                           const Dense* projection) {
  if (x.batch != conv_output.batch || x.steps != conv_output.steps) {
    throw DimensionError("tcn_residual: time lengths differ (" + std::to_string(x.steps) +
                         " vs " + std::to_string(conv_output.steps) + ")");
  }
  Tensor skip = x.data;
  if (projection) {
    skip = projection->forward(x.data);
  } else if (x.features() != conv_output.features()) {
    throw DimensionError("tcn_residual: channel mismatch without a projection");
  }
  return {relu(add(conv_output.data, skip)), x.batch, x.steps};
}

// ---------------------------------------------------------------------------

TcnBlock::TcnBlock(std::size_t in_channels, std::size_t filters, std::size_t kernel,
                   const std::vector<std::size_t>& dilations) {
  if (dilations.empty()) throw ConfigError("TCN needs at least one dilation");
  std::size_t channels = in_channels;
  for (auto d : dilations) {
    layers.emplace_back(channels, filters, kernel, d);
    channels = filters;
  }
  if (in_channels != filters) projection.emplace(in_channels, filters);
}

std::vector<SequenceBatch> TcnBlock::forward_layers(const SequenceBatch& x) const {
  std::vector<SequenceBatch> outputs;
  SequenceBatch h = x;
  for (std::size_t l = 0; l < layers.size(); ++l) {
    const auto conv = layers[l].forward(h);
    const Dense* proj = (l == 0 && projection) ? &*projection : nullptr;
    h = tcn_residual(h, conv, proj);
    outputs.push_back(h);
  }
  return outputs;
}

SequenceBatch TcnBlock::forward(const SequenceBatch& x) const { return forward_layers(x).back(); }

std::size_t TcnBlock::receptive_field() const {
  std::size_t r = 1;
  for (const auto& l : layers) r += (l.kernel() - 1) * l.dilation();
  return r;
}

void TcnBlock::collect(const std::string& prefix, ParameterList& out) const {
  for (std::size_t l = 0; l < layers.size(); ++l)
    layers[l].collect(prefix + ".conv" + std::to_string(l), out);
  if (projection) projection->collect(prefix + ".skip", out);
}

// ---------------------------------------------------------------------------

LstmParams::LstmParams(std::size_t input_size, std::size_t hidden)
    : W_i(param({input_size, hidden})), W_f(param({input_size, hidden})),
      W_o(param({input_size, hidden})), W_c(param({input_size, hidden})),
      U_i(param({hidden, hidden})), U_f(param({hidden, hidden})),
      U_o(param({hidden, hidden})), U_c(param({hidden, hidden})),
      b_i(param({hidden})), b_f(param({hidden})), b_o(param({hidden})), b_c(param({hidden})) {}

void LstmParams::collect(const std::string& prefix, ParameterList& out) const {
  out.push_back({prefix + ".W_i", W_i});
  out.push_back({prefix + ".W_f", W_f});
  out.push_back({prefix + ".W_o", W_o});
  out.push_back({prefix + ".W_c", W_c});
  out.push_back({prefix + ".U_i", U_i});
  out.push_back({prefix + ".U_f", U_f});
  out.push_back({prefix + ".U_o", U_o});
  out.push_back({prefix + ".U_c", U_c});
  out.push_back({prefix + ".b_i", b_i});
  out.push_back({prefix + ".b_f", b_f});
  out.push_back({prefix + ".b_o", b_o});
  out.push_back({prefix + ".b_c", b_c});
}

namespace {

LstmState combine_gates(const Tensor& xi, const Tensor& xf, const Tensor& xo, const Tensor& xc,
                        const LstmState& prev, const LstmParams& p) {
  const Tensor i = sigmoid(add(xi, affine(prev.h, p.U_i, p.b_i)));
  const Tensor f = sigmoid(add(xf, affine(prev.h, p.U_f, p.b_f)));
  const Tensor o = sigmoid(add(xo, affine(prev.h, p.U_o, p.b_o)));
  const Tensor c_tilde = tanh(add(xc, affine(prev.h, p.U_c, p.b_c)));
  Tensor c = add(mul(f, prev.c), mul(i, c_tilde));
  Tensor h = mul(o, tanh(c));
  return {std::move(h), std::move(c)};
}

void check_state(const Tensor& x_t, const LstmState& prev, const LstmParams& p) {
  if (x_t.cols() != p.input_size()) {
    throw DimensionError("lstm: input width " + std::to_string(x_t.cols()) + " but W expects " +
                         std::to_string(p.input_size()));
  }
  const Shape expect{x_t.rows(), p.hidden()};
  if (prev.h.shape() != expect || prev.c.shape() != expect) {
    throw DimensionError("lstm: state must be " + shape_string(expect) + ", got h " +
                         shape_string(prev.h.shape()) + ", c " + shape_string(prev.c.shape()));
  }
}

}  // namespace

LstmState lstm_step(const Tensor& x_t, const LstmState& prev, const LstmParams& p) {
  check_state(x_t, prev, p);
  return combine_gates(matmul(x_t, p.W_i), matmul(x_t, p.W_f), matmul(x_t, p.W_o),
                       matmul(x_t, p.W_c), prev, p);
}

SequenceBatch lstm_sequence(const SequenceBatch& x, const LstmParams& p, bool reverse) {
  if (x.features() != p.input_size()) {
    throw DimensionError("lstm: input width " + std::to_string(x.features()) +
                         " but W expects " + std::to_string(p.input_size()));
  }
  const std::size_t B = x.batch, T = x.steps, H = p.hidden();
  if (T < 1) throw ContractError("lstm: empty sequence");
  // Input projections for all timesteps at once; rows are gathered per step.
  const Tensor xi = matmul(x.data, p.W_i);
  const Tensor xf = matmul(x.data, p.W_f);
  const Tensor xo = matmul(x.data, p.W_o);
  const Tensor xc = matmul(x.data, p.W_c);

  LstmState state{Tensor::zeros({B, H}), Tensor::zeros({B, H})};
  std::vector<Tensor> hidden(T);
  for (std::size_t s = 0; s < T; ++s) {
    const std::size_t t = reverse ? T - 1 - s : s;
    const auto rows = timestep_rows(B, T, t);
    state = combine_gates(gather_rows(xi, rows), gather_rows(xf, rows), gather_rows(xo, rows),
                          gather_rows(xc, rows), state, p);
    hidden[t] = state.h;
  }
  if (B == 1) return {concat_rows(hidden), B, T};
  // concat_rows gives time-major rows (t*B + b); reorder to sample-major.
  const Tensor time_major = concat_rows(hidden);
  std::vector<std::ptrdiff_t> order(B * T);
  for (std::size_t b = 0; b < B; ++b)
    for (std::size_t t = 0; t < T; ++t)
      order[b * T + t] = static_cast<std::ptrdiff_t>(t * B + b);
  return {gather_rows(time_major, order), B, T};
}

SequenceBatch bilstm_forward(const SequenceBatch& x, const LstmParams& fwd,
                             const LstmParams& bwd) {
  const auto f = lstm_sequence(x, fwd, false);
  const auto b = lstm_sequence(x, bwd, true);
  const Tensor parts[] = {f.data, b.data};
  return {concat_cols(parts), x.batch, x.steps};
}

Tensor bilstm_forward(const Tensor& x, const LstmParams& fwd, const LstmParams& bwd) {
  return bilstm_forward(SequenceBatch{x, 1, x.rows()}, fwd, bwd).data;
}

Tensor gated_output(const Tensor& x, const Tensor& gate_weight) {
  if (gate_weight.dim() != 2 || gate_weight.rows() != x.cols() || gate_weight.cols() != x.cols()) {
    throw DimensionError("gated_output: W_g " + shape_string(gate_weight.shape()) +
                         " must map width " + std::to_string(x.cols()) + " to itself");
  }
  return mul(sigmoid(matmul(x, gate_weight)), x);
}

}  // namespace tcft
