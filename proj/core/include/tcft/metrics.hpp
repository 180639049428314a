#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "tcft/tensor.hpp"

namespace tcft {

// Mean of squared residuals as a differentiable scalar. `labels` is treated
// as a constant. Throws ContractError when empty or mismatched.
Tensor mse_loss(const Tensor& predictions, std::span<const double> labels);

double rmse(std::span<const double> predictions, std::span<const double> labels);
double mae(std::span<const double> predictions, std::span<const double> labels);
// 1 - SS_res/SS_tot. A constant label vector gives 1 when fitted exactly and 0
// otherwise.
double r_squared(std::span<const double> predictions, std::span<const double> labels);

enum class ScoreConvention {
  standard,    // early d<0: e^{-d/13}-1, late d>=0: e^{d/10}-1
  as_printed,  // the swapped sign layout, negative for late predictions
};

std::string to_string(ScoreConvention c);
ScoreConvention parse_score_convention(std::string_view name);

// Per-sample penalty for d = predicted - true.
double score_term(double d, ScoreConvention convention = ScoreConvention::standard);
double nasa_score(std::span<const double> predictions, std::span<const double> labels,
                  ScoreConvention convention = ScoreConvention::standard);

struct GroupMetrics {
  std::string group;  // window length as text, or "concat"
  double rmse = 0.0;
  double score = 0.0;
  double mae = 0.0;
  double r_squared = 0.0;
  std::size_t n = 0;
};

GroupMetrics compute_metrics(std::string group, std::span<const double> predictions,
                             std::span<const double> labels,
                             ScoreConvention convention = ScoreConvention::standard);

// Per-engine predictions of one window-size model on its test dataset.
struct SizePredictions {
  std::size_t window = 0;
  std::vector<int> unit_ids;
  std::vector<double> predictions;
  std::vector<double> labels;
};

struct MetricsReport {
  std::vector<GroupMetrics> per_size;
  GroupMetrics concatenated;
};

// Checks that `expected_units` are each covered exactly once across sizes
// (CoverageError otherwise), then reports per-size metrics and pooled
// metrics over the union of per-engine predictions.
MetricsReport evaluate_multi_window(std::span<const SizePredictions> sizes,
                                    std::span<const int> expected_units,
                                    ScoreConvention convention = ScoreConvention::standard);

}  // namespace tcft
