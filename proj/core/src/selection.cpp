#include "tcft/selection.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "tcft/errors.hpp"

namespace tcft {

double pearson_r(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) {
    throw ContractError("pearson_r: series lengths differ (" + std::to_string(x.size()) + " vs " +
                        std::to_string(y.size()) + ")");
  }
  if (x.size() < 2) throw ContractError("pearson_r: need at least two observations");
  const double n = static_cast<double>(x.size());
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0, sxx = 0, syy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = x[i] - mx, dy = y[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx == 0.0 || syy == 0.0) return 0.0;
  return std::clamp(sxy / (std::sqrt(sxx) * std::sqrt(syy)), -1.0, 1.0);
}

double monotonicity(std::span<const double> x) {
  if (x.size() < 2) throw ContractError("monotonicity: need at least two observations");
  std::size_t ups = 0;
  for (std::size_t i = 0; i + 1 < x.size(); ++i)
    if (x[i + 1] - x[i] > 0) ++ups;
  return static_cast<double>(ups) / static_cast<double>(x.size() - 1);
}

SensorSelection select_sensors(std::span<const EngineTrajectory> train, double tau_c,
                               double tau_m) {
  SensorSelection sel;
  sel.tau_c = tau_c;
  sel.tau_m = tau_m;
  std::size_t used = 0;
  std::vector<double> r_sum(kSensorCount, 0.0), m_sum(kSensorCount, 0.0);
  for (const auto& eng : train) {
    if (eng.length() < 2) continue;
    ++used;
    const auto cycles = eng.cycle_series();
    for (std::size_t s = 0; s < kSensorCount; ++s) {
      const auto series = eng.sensor_series(s);
      r_sum[s] += pearson_r(series, cycles);
      m_sum[s] += monotonicity(series);
    }
  }
  if (used == 0) throw DataError("sensor selection needs at least one engine with two cycles");
  for (std::size_t s = 0; s < kSensorCount; ++s) {
    SensorStatistic st;
    st.sensor = s;
    st.r = r_sum[s] / static_cast<double>(used);
    st.m = m_sum[s] / static_cast<double>(used);
    st.selected = std::abs(st.r) > tau_c && monotonicity_strength(st.m) > tau_m;
    if (st.selected) sel.selected.push_back(s);
    sel.stats.push_back(st);
  }
  if (sel.selected.empty()) {
    std::ostringstream msg;
    msg << "no sensor passes |r| > " << tau_c << " and monotonicity strength > " << tau_m
        << "; relax tau_c / tau_m";
    throw ConfigError(msg.str());
  }
  return sel;
}

NormalizationStats fit_normalization(std::span<const EngineTrajectory> train,
                                     std::span<const std::size_t> sensors) {
  NormalizationStats st;
  st.sensors.assign(sensors.begin(), sensors.end());
  st.min.assign(sensors.size(), std::numeric_limits<double>::infinity());
  st.max.assign(sensors.size(), -std::numeric_limits<double>::infinity());
  for (const auto& eng : train) {
    for (const auto& row : eng.rows) {
      for (std::size_t k = 0; k < sensors.size(); ++k) {
        const double v = row.sensors.at(sensors[k]);
        st.min[k] = std::min(st.min[k], v);
        st.max[k] = std::max(st.max[k], v);
      }
    }
  }
  for (std::size_t k = 0; k < sensors.size(); ++k) {
    if (!std::isfinite(st.min[k])) throw DataError("normalization fitted on empty training data");
  }
  return st;
}

double min_max_normalize(double x, double min, double max) {
  const double span = max - min;
  if (span <= 0.0) return 0.0;
  return (x - min) / span;
}

std::vector<double> normalized_features(const EngineTrajectory& engine,
                                        const NormalizationStats& stats) {
  const std::size_t C = stats.sensors.size(), L = engine.length();
  std::vector<double> out(C * L);
  for (std::size_t c = 0; c < C; ++c)
    for (std::size_t t = 0; t < L; ++t)
      out[c * L + t] =
          min_max_normalize(engine.rows[t].sensors.at(stats.sensors[c]), stats.min[c], stats.max[c]);
  return out;
}

}  // namespace tcft
