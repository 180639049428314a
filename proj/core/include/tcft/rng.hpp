#pragma once

#include <cstdint>
#include <random>
#include <span>

namespace tcft {

// Single seeded source of randomness for a run. Draws are derived from raw
// mt19937_64 output so sequences are identical across standard libraries.
class Rng {
 public:
  explicit Rng(std::uint64_t seed = 0) : engine_(seed), seed_(seed) {}

  std::uint64_t seed() const noexcept { return seed_; }

  // Uniform in [0, 1).
  double uniform();
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  // Uniform integer in [0, n). n must be positive.
  std::uint64_t below(std::uint64_t n);
  double normal();
  void shuffle(std::span<std::size_t> items);

  // Independent stream for a worker (e.g. one window size) derived from this one.
  Rng fork(std::uint64_t stream);

 private:
  std::mt19937_64 engine_;
  std::uint64_t seed_;
};

}  // namespace tcft
