#include "tcft/optim.hpp"

#include <cmath>

#include "tcft/errors.hpp"

namespace tcft {

void adam_update(std::span<double> theta, std::span<const double> grad, std::span<double> m,
                 std::span<double> v, std::size_t t, const AdamConfig& c) {
  if (t < 1) throw ContractError("adam: step counter starts at 1");
  const double bc1 = 1.0 - std::pow(c.beta1, static_cast<double>(t));
  const double bc2 = 1.0 - std::pow(c.beta2, static_cast<double>(t));
  for (std::size_t i = 0; i < theta.size(); ++i) {
    const double g = (grad.empty() ? 0.0 : grad[i]) + c.weight_decay * theta[i];
    m[i] = c.beta1 * m[i] + (1.0 - c.beta1) * g;
    v[i] = c.beta2 * v[i] + (1.0 - c.beta2) * g * g;
    const double m_hat = m[i] / bc1;
    const double v_hat = v[i] / bc2;
    theta[i] -= c.learning_rate * m_hat / (std::sqrt(v_hat) + c.epsilon);
  }
}

void adam_step(const ParameterList& params, AdamState& state, std::size_t t,
               const AdamConfig& config) {
  if (t < 1) throw ContractError("adam: step counter starts at 1");
  if (state.m.size() != params.size()) {
    state.m.assign(params.size(), {});
    state.v.assign(params.size(), {});
    for (std::size_t i = 0; i < params.size(); ++i) {
      state.m[i].assign(params[i].tensor.size(), 0.0);
      state.v[i].assign(params[i].tensor.size(), 0.0);
    }
  }
  for (std::size_t i = 0; i < params.size(); ++i) {
    Tensor p = params[i].tensor;
    adam_update(p.mutable_values(), p.grad(), state.m[i], state.v[i], t, config);
  }
  state.step = t;
}

}  // namespace tcft
