#include "tcft/windows.hpp"

#include <algorithm>
#include <iterator>

#include "tcft/errors.hpp"

namespace tcft {

double piecewise_rul(std::size_t total_cycles, std::size_t current_cycle, double cap) {
  if (current_cycle < 1 || current_cycle > total_cycles) {
    throw ContractError("piecewise_rul: cycle " + std::to_string(current_cycle) +
                        " outside [1, " + std::to_string(total_cycles) + "]");
  }
  return std::min(cap, static_cast<double>(total_cycles - current_cycle));
}

std::vector<double> test_lifetime_labels(std::size_t length, double final_rul, double cap) {
  std::vector<double> out(length);
  for (std::size_t t = 1; t <= length; ++t)
    out[t - 1] = std::min(cap, final_rul + static_cast<double>(length - t));
  return out;
}

namespace {

WindowSample cut(const EngineTrajectory& engine, std::span<const double> features,
                 std::size_t channels, std::size_t window, std::size_t end_cycle, double label) {
  const std::size_t L = engine.length();
  WindowSample s;
  s.features.resize(channels * window);
  const std::size_t first = end_cycle - window;  // 0-based column of the first cycle
  for (std::size_t c = 0; c < channels; ++c)
    std::copy_n(features.data() + c * L + first, window, s.features.data() + c * window);
  s.label = label;
  s.unit_id = engine.unit_id;
  s.end_cycle = static_cast<int>(end_cycle);
  return s;
}

void check_features(const EngineTrajectory& engine, std::span<const double> features,
                    std::size_t channels) {
  if (features.size() != channels * engine.length()) {
    throw DimensionError("feature matrix of unit " + std::to_string(engine.unit_id) +
                         " does not match " + std::to_string(channels) + " x " +
                         std::to_string(engine.length()));
  }
}

}  // namespace

std::vector<WindowSample> segment_train(const EngineTrajectory& engine,
                                        std::span<const double> features, std::size_t channels,
                                        std::size_t window, double cap) {
  check_features(engine, features, channels);
  std::vector<WindowSample> out;
  const std::size_t L = engine.length();
  if (window == 0 || L < window) return out;
  out.reserve(L - window + 1);
  for (std::size_t t = window; t <= L; ++t)
    out.push_back(cut(engine, features, channels, window, t, piecewise_rul(L, t, cap)));
  return out;
}

std::size_t train_window_count(std::span<const EngineTrajectory> engines, std::size_t window) {
  std::size_t n = 0;
  for (const auto& e : engines)
    if (e.length() >= window) n += e.length() - window + 1;
  return n;
}

WindowDataset build_train_dataset(std::span<const EngineTrajectory> train,
                                  const NormalizationStats& stats, std::size_t window,
                                  double cap) {
  WindowDataset ds;
  ds.window = window;
  ds.channels = stats.sensors.size();
  ds.split = Split::train;
  for (const auto& eng : train) {
    const auto feats = normalized_features(eng, stats);
    auto samples = segment_train(eng, feats, ds.channels, window, cap);
    std::move(samples.begin(), samples.end(), std::back_inserter(ds.samples));
  }
  return ds;
}

std::size_t assigned_size_index(const EngineTrajectory& engine, const WindowSizes& sizes) {
  const auto asc = sizes.ascending();
  for (std::size_t k = asc.size(); k-- > 0;)
    if (engine.length() >= asc[k]) return k;
  throw DataError("test unit " + std::to_string(engine.unit_id) + " has " +
                  std::to_string(engine.length()) + " cycles, fewer than the small window " +
                  std::to_string(sizes.small));
}

std::vector<WindowDataset> assign_test_windows(std::span<const EngineTrajectory> test,
                                               std::span<const double> final_rul,
                                               const NormalizationStats& stats,
                                               const WindowSizes& sizes, double cap) {
  sizes.validate();
  if (final_rul.size() != test.size()) {
    throw DataError("ground truth lists " + std::to_string(final_rul.size()) +
                    " RUL values for " + std::to_string(test.size()) + " test engines");
  }
  const auto asc = sizes.ascending();
  std::vector<WindowDataset> out(asc.size());
  for (std::size_t k = 0; k < asc.size(); ++k) {
    out[k].window = asc[k];
    out[k].channels = stats.sensors.size();
    out[k].split = Split::test;
  }
  for (std::size_t e = 0; e < test.size(); ++e) {
    const auto& eng = test[e];
    const std::size_t k = assigned_size_index(eng, sizes);
    const auto feats = normalized_features(eng, stats);
    out[k].samples.push_back(cut(eng, feats, out[k].channels, asc[k], eng.length(),
                                 std::min(cap, final_rul[e])));
  }
  return out;
}

}  // namespace tcft
