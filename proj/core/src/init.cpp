#include "tcft/init.hpp"

#include <cmath>
#include <string_view>

namespace tcft {

double xavier_bound(std::size_t fan_in, std::size_t fan_out) {
  return std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
}

void xavier_uniform_init(ParameterList& params, Rng& rng) {
  for (auto& p : params) {
    auto v = p.tensor.mutable_values();
    const auto& shape = p.tensor.shape();
    if (shape.size() == 1) {
      const bool gain = std::string_view(p.name).ends_with("gain");
      std::fill(v.begin(), v.end(), gain ? 1.0 : 0.0);
      continue;
    }
    std::size_t fan_in = shape[0], fan_out = shape[1];
    if (shape.size() == 3) {
      fan_in = shape[1] * shape[2];
      fan_out = shape[0] * shape[2];
    }
    const double bound = xavier_bound(fan_in, fan_out);
    for (auto& x : v) x = rng.uniform(-bound, bound);
  }
}

void xavier_uniform_init(TcftBedModel& model, Rng& rng) {
  auto params = model.parameters();
  xavier_uniform_init(params, rng);
}

}  // namespace tcft
