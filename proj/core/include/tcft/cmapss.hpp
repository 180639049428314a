#pragma once

#include <array>
#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace tcft {

inline constexpr std::size_t kSettingCount = 3;
inline constexpr std::size_t kSensorCount = 21;
inline constexpr std::size_t kColumnCount = 2 + kSettingCount + kSensorCount;

struct CycleRecord {
  int cycle = 0;
  std::array<double, kSettingCount> settings{};
  std::array<double, kSensorCount> sensors{};
};

// One unit's record; cycles run 1, 2, ..., length().
struct EngineTrajectory {
  int unit_id = 0;
  std::vector<CycleRecord> rows;

  std::size_t length() const { return rows.size(); }
  // sensor is 0-based (column "s1" is index 0).
  std::vector<double> sensor_series(std::size_t sensor) const;
  std::vector<double> cycle_series() const;
};

// Whitespace-separated 26-column rows. Throws ParseError with the 1-based
// line number on malformed input.
std::vector<EngineTrajectory> parse_cmapss(std::istream& in);
std::vector<EngineTrajectory> load_cmapss(const std::filesystem::path& path);

// One non-negative RUL value per line, in test-unit order.
std::vector<double> parse_rul(std::istream& in);
std::vector<double> load_rul(const std::filesystem::path& path);

enum class SubDataset { FD001, FD002, FD003, FD004 };

SubDataset parse_sub_dataset(std::string_view name);
std::string to_string(SubDataset s);

struct WindowSizes {
  std::size_t small = 0;
  std::size_t medium = 0;
  std::size_t large = 0;

  std::array<std::size_t, 3> ascending() const { return {small, medium, large}; }
  void validate() const;
  bool operator==(const WindowSizes&) const = default;
};

// small = longest window every test engine can fill; medium from the
// medium-size sweep; large = 125 everywhere.
WindowSizes default_window_sizes(SubDataset s);

struct TrajectoryCounts {
  std::size_t train = 0;
  std::size_t test = 0;
};
// Published trajectory counts of the benchmark distribution.
TrajectoryCounts expected_trajectory_counts(SubDataset s);

struct CmapssFiles {
  std::filesystem::path train, test, rul;
};
// <dir>/train_FD00x.txt, test_FD00x.txt, RUL_FD00x.txt
CmapssFiles cmapss_files(const std::filesystem::path& dir, SubDataset s);

}  // namespace tcft
