#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "tcft/layers.hpp"

namespace tcft {

struct AdamConfig {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  double weight_decay = 1e-5;  // coupled L2: added to the gradient
};

// First and second moment buffers, one pair per parameter tensor.
struct AdamState {
  std::vector<std::vector<double>> m;
  std::vector<std::vector<double>> v;
  std::size_t step = 0;
};

// In-place bias-corrected Adam update of one buffer at step t (1-based).
void adam_update(std::span<double> theta, std::span<const double> grad, std::span<double> m,
                 std::span<double> v, std::size_t t, const AdamConfig& config);

// Updates every parameter from its accumulated gradient (absent = zero) and
// records t in the state. Throws ContractError for t < 1.
void adam_step(const ParameterList& params, AdamState& state, std::size_t t,
               const AdamConfig& config);

}  // namespace tcft
