#pragma once

#include <cstddef>

#include "tcft/model.hpp"
#include "tcft/rng.hpp"

namespace tcft {

// sqrt(6 / (fan_in + fan_out)).
double xavier_bound(std::size_t fan_in, std::size_t fan_out);

// Matrices and conv kernels ~ U(-bound, bound); biases 0; layer-norm gains 1.
// Conv kernels (out, in, k) use fan_in = in*k, fan_out = out*k.
void xavier_uniform_init(TcftBedModel& model, Rng& rng);
void xavier_uniform_init(ParameterList& params, Rng& rng);

}  // namespace tcft
