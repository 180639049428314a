#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "tcft/cmapss.hpp"

namespace tcft {

// Pearson correlation of two equal-length series; 0 when either is constant.
double pearson_r(std::span<const double> x, std::span<const double> y);

// Fraction of consecutive steps that strictly increase: (1/(n-1)) sum 1(x[i+1] > x[i]).
double monotonicity(std::span<const double> x);
// max(M, 1 - M): a consistently decreasing sensor is as monotone as an
// increasing one.
inline double monotonicity_strength(double m) { return m > 1.0 - m ? m : 1.0 - m; }

struct SensorStatistic {
  std::size_t sensor = 0;  // 0-based
  double r = 0.0;          // mean per-engine Pearson r against cycle
  double m = 0.0;          // mean per-engine monotonicity
  bool selected = false;
};

struct SensorSelection {
  double tau_c = 0.5;
  double tau_m = 0.5;
  std::vector<SensorStatistic> stats;  // all 21 sensors
  std::vector<std::size_t> selected;   // ascending 0-based sensor indices
};

// Keeps sensors with |r| > tau_c and strength(M) > tau_m, where r and M are
// computed per engine and averaged (unweighted) across engines. Must only
// see the training split. Throws ConfigError when nothing survives.
SensorSelection select_sensors(std::span<const EngineTrajectory> train, double tau_c,
                               double tau_m);

// Per-channel min/max over training rows, one entry per selected sensor.
struct NormalizationStats {
  std::vector<std::size_t> sensors;
  std::vector<double> min;
  std::vector<double> max;
};

NormalizationStats fit_normalization(std::span<const EngineTrajectory> train,
                                     std::span<const std::size_t> sensors);

// (x - min) / (max - min); constant channels (max == min) map to 0.
double min_max_normalize(double x, double min, double max);

// Normalized selected-sensor matrix of one engine, row-major [channels x length].
std::vector<double> normalized_features(const EngineTrajectory& engine,
                                        const NormalizationStats& stats);

}  // namespace tcft
