#include "tcft/metrics.hpp"

#include <cmath>
#include <map>

#include <fmt/format.h>

#include "tcft/errors.hpp"

namespace tcft {

namespace {

void check_pair(std::span<const double> p, std::span<const double> y, const char* what) {
  if (p.size() != y.size())
    throw ContractError(fmt::format("{}: {} predictions vs {} labels", what, p.size(), y.size()));
  if (p.empty()) throw ContractError(fmt::format("{}: empty input", what));
}

}  // namespace

Tensor mse_loss(const Tensor& predictions, std::span<const double> labels) {
  check_pair(predictions.values(), labels, "mse_loss");
  const auto p = predictions.values();
  const double n = static_cast<double>(p.size());
  std::vector<double> residual(p.size());
  double total = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    residual[i] = p[i] - labels[i];
    total += residual[i] * residual[i];
  }
  return Tensor::make_result(
      {1}, {total / n}, {predictions}, "mse_loss",
      [residual = std::move(residual), n](detail::Node& self) {
        auto& in = *self.inputs[0];
        if (!in.requires_grad) return;
        auto& g = in.grad_buffer();
        const double upstream = self.grad[0];
        for (std::size_t i = 0; i < residual.size(); ++i) g[i] += upstream * 2.0 * residual[i] / n;
      });
}

double rmse(std::span<const double> p, std::span<const double> y) {
  check_pair(p, y, "rmse");
  double s = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) s += (p[i] - y[i]) * (p[i] - y[i]);
  return std::sqrt(s / static_cast<double>(p.size()));
}

double mae(std::span<const double> p, std::span<const double> y) {
  check_pair(p, y, "mae");
  double s = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) s += std::abs(p[i] - y[i]);
  return s / static_cast<double>(p.size());
}

double r_squared(std::span<const double> p, std::span<const double> y) {
  check_pair(p, y, "r_squared");
  double mean = 0.0;
  for (double v : y) mean += v;
  mean /= static_cast<double>(y.size());
  double ss_res = 0.0, ss_tot = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    ss_res += (y[i] - p[i]) * (y[i] - p[i]);
    ss_tot += (y[i] - mean) * (y[i] - mean);
  }
  if (ss_tot == 0.0) return ss_res == 0.0 ? 1.0 : 0.0;
  return 1.0 - ss_res / ss_tot;
}

std::string to_string(ScoreConvention c) {
  return c == ScoreConvention::standard ? "standard" : "as_printed";
}

ScoreConvention parse_score_convention(std::string_view name) {
  if (name == "standard") return ScoreConvention::standard;
  if (name == "as_printed") return ScoreConvention::as_printed;
  throw ConfigError(fmt::format("unknown score convention '{}' (valid: standard, as_printed)", name));
}

double score_term(double d, ScoreConvention convention) {
  if (convention == ScoreConvention::standard)
    return d < 0.0 ? std::exp(-d / 13.0) - 1.0 : std::exp(d / 10.0) - 1.0;
  return d >= 0.0 ? std::exp(-d / 13.0) - 1.0 : std::exp(-d / 10.0) - 1.0;
}

double nasa_score(std::span<const double> p, std::span<const double> y,
                  ScoreConvention convention) {
  if (p.size() != y.size())
    throw ContractError(fmt::format("nasa_score: {} predictions vs {} labels", p.size(), y.size()));
  double s = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) s += score_term(p[i] - y[i], convention);
  return s;
}

GroupMetrics compute_metrics(std::string group, std::span<const double> p,
                             std::span<const double> y, ScoreConvention convention) {
  GroupMetrics m;
  m.group = std::move(group);
  m.n = p.size();
  if (p.empty()) return m;
  m.rmse = rmse(p, y);
  m.score = nasa_score(p, y, convention);
  m.mae = mae(p, y);
  m.r_squared = r_squared(p, y);
  return m;
}

MetricsReport evaluate_multi_window(std::span<const SizePredictions> sizes,
                                    std::span<const int> expected_units,
                                    ScoreConvention convention) {
  std::map<int, std::size_t> seen;
  for (int u : expected_units) seen.emplace(u, 0);
  for (const auto& s : sizes) {
    if (s.unit_ids.size() != s.predictions.size() || s.labels.size() != s.predictions.size())
      throw ContractError(fmt::format("window {}: unit/prediction/label lengths differ", s.window));
    for (int u : s.unit_ids) {
      auto it = seen.find(u);
      if (it == seen.end())
        throw CoverageError(fmt::format("unit {} in window {} is not an expected test engine", u,
                                        s.window));
      if (++it->second > 1)
        throw CoverageError(fmt::format("unit {} is covered by more than one window size", u));
    }
  }
  for (const auto& [u, count] : seen)
    if (count == 0) throw CoverageError(fmt::format("unit {} is not covered by any window size", u));

  MetricsReport report;
  std::vector<double> all_p, all_y;
  for (const auto& s : sizes) {
    report.per_size.push_back(
        compute_metrics(std::to_string(s.window), s.predictions, s.labels, convention));
    all_p.insert(all_p.end(), s.predictions.begin(), s.predictions.end());
    all_y.insert(all_y.end(), s.labels.begin(), s.labels.end());
  }
  report.concatenated = compute_metrics("concat", all_p, all_y, convention);
  return report;
}

}  // namespace tcft
