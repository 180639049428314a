#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "tcft/cmapss.hpp"
#include "tcft/selection.hpp"

namespace tcft {

inline constexpr double kRulCap = 125.0;

// min(cap, total_cycles - current_cycle) for 1 <= current_cycle <= total_cycles.
double piecewise_rul(std::size_t total_cycles, std::size_t current_cycle, double cap = kRulCap);

// Labels for every cycle of a test engine whose true RUL after its last
// cycle is `final_rul`: min(cap, final_rul + (length - t)).
std::vector<double> test_lifetime_labels(std::size_t length, double final_rul,
                                         double cap = kRulCap);

enum class Split { train, test };

struct WindowSample {
  std::vector<double> features;  // row-major [channels x window]
  double label = 0.0;
  int unit_id = 0;
  int end_cycle = 0;
};

struct WindowDataset {
  std::size_t window = 0;
  std::size_t channels = 0;
  Split split = Split::train;
  std::vector<WindowSample> samples;

  std::size_t size() const { return samples.size(); }
  bool empty() const { return samples.empty(); }
};

// Shift-1 windows over one training engine. `features` is the engine's
// normalized [channels x length] matrix. Engines shorter than `window`
// contribute nothing.
std::vector<WindowSample> segment_train(const EngineTrajectory& engine,
                                        std::span<const double> features, std::size_t channels,
                                        std::size_t window, double cap = kRulCap);

// Sum over engines of max(0, L - window + 1).
std::size_t train_window_count(std::span<const EngineTrajectory> engines, std::size_t window);

WindowDataset build_train_dataset(std::span<const EngineTrajectory> train,
                                  const NormalizationStats& stats, std::size_t window,
                                  double cap = kRulCap);

// Index into WindowSizes::ascending() of the largest size the engine can
// fill. Throws DataError naming the unit when it is shorter than `small`.
std::size_t assigned_size_index(const EngineTrajectory& engine, const WindowSizes& sizes);

// One final window per test engine, placed in the largest size that fits.
// `final_rul` is the ground-truth RUL in unit order. Returns datasets for
// small, medium, large.
std::vector<WindowDataset> assign_test_windows(std::span<const EngineTrajectory> test,
                                               std::span<const double> final_rul,
                                               const NormalizationStats& stats,
                                               const WindowSizes& sizes, double cap = kRulCap);

}  // namespace tcft
