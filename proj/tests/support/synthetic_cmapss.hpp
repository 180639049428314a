#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "tcft/cmapss.hpp"

namespace tcft::testing {

// Run-to-failure fleet shaped like the benchmark files: 26 columns, a handful
// of sensors with exponential degradation trends, some constant sensors and
// some pure-noise sensors.
struct SyntheticSpec {
  std::size_t train_units = 10;
  std::size_t test_units = 10;
  std::size_t min_life = 130;
  std::size_t max_life = 260;
  std::size_t min_test_length = 31;  // test engines are truncated no shorter than this
  double noise = 0.05;
  std::uint64_t seed = 7;
};

struct SyntheticCmapss {
  std::string train_text;
  std::string test_text;
  std::string rul_text;
  std::vector<EngineTrajectory> train;
  std::vector<EngineTrajectory> test;
  std::vector<double> rul;
};

// 0-based indices of the sensors that carry a degradation trend.
const std::vector<std::size_t>& trending_sensors();

SyntheticCmapss make_synthetic_cmapss(const SyntheticSpec& spec);

// Writes train_<name>.txt, test_<name>.txt and RUL_<name>.txt into `dir`.
void write_synthetic_files(const std::filesystem::path& dir, const std::string& name,
                           const SyntheticCmapss& data);

}  // namespace tcft::testing
