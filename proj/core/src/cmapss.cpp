#include "tcft/cmapss.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <set>

#include "tcft/errors.hpp"

namespace tcft {

std::vector<double> EngineTrajectory::sensor_series(std::size_t sensor) const {
  std::vector<double> out;
  out.reserve(rows.size());
  for (const auto& r : rows) out.push_back(r.sensors.at(sensor));
  return out;
}

std::vector<double> EngineTrajectory::cycle_series() const {
  std::vector<double> out;
  out.reserve(rows.size());
  for (const auto& r : rows) out.push_back(r.cycle);
  return out;
}

namespace {

bool parse_double(std::string_view tok, double& out) {
  const auto* end = tok.data() + tok.size();
  auto [p, ec] = std::from_chars(tok.data(), end, out);
  return ec == std::errc() && p == end && std::isfinite(out);
}

std::vector<std::string_view> split_ws(std::string_view line) {
  std::vector<std::string_view> toks;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    const std::size_t start = i;
    while (i < line.size() && !std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    if (i > start) toks.push_back(line.substr(start, i - start));
  }
  return toks;
}

int parse_integral(std::string_view tok, std::size_t line_no, const char* what) {
  double v = 0;
  if (!parse_double(tok, v) || v != std::floor(v) || v < 1 || v > 1e9) {
    throw ParseError("line " + std::to_string(line_no) + ": " + what +
                         " must be a positive integer, got '" + std::string(tok) + "'",
                     line_no);
  }
  return static_cast<int>(v);
}

}  // namespace

std::vector<EngineTrajectory> parse_cmapss(std::istream& in) {
  std::vector<EngineTrajectory> engines;
  std::set<int> finished;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto toks = split_ws(line);
    if (toks.empty()) continue;
    if (toks.size() != kColumnCount) {
      throw ParseError("line " + std::to_string(line_no) + ": expected " +
                           std::to_string(kColumnCount) + " columns, found " +
                           std::to_string(toks.size()),
                       line_no);
    }
    CycleRecord rec;
    const int unit = parse_integral(toks[0], line_no, "unit id");
    rec.cycle = parse_integral(toks[1], line_no, "cycle");
    for (std::size_t k = 0; k < kSettingCount + kSensorCount; ++k) {
      double v = 0;
      if (!parse_double(toks[2 + k], v)) {
        throw ParseError("line " + std::to_string(line_no) + ": column " + std::to_string(3 + k) +
                             " is not numeric ('" + std::string(toks[2 + k]) + "')",
                         line_no);
      }
      if (k < kSettingCount) rec.settings[k] = v;
      else rec.sensors[k - kSettingCount] = v;
    }
    if (engines.empty() || engines.back().unit_id != unit) {
      if (!engines.empty()) finished.insert(engines.back().unit_id);
      if (finished.count(unit)) {
        throw ParseError("line " + std::to_string(line_no) + ": unit " + std::to_string(unit) +
                             " reappears after other units",
                         line_no);
      }
      engines.push_back(EngineTrajectory{unit, {}});
    }
    auto& eng = engines.back();
    const int expected = static_cast<int>(eng.rows.size()) + 1;
    if (rec.cycle != expected) {
      throw ParseError("line " + std::to_string(line_no) + ": unit " + std::to_string(unit) +
                           " cycle " + std::to_string(rec.cycle) + " where " +
                           std::to_string(expected) + " expected (cycles must be contiguous from 1)",
                       line_no);
    }
    eng.rows.push_back(rec);
  }
  return engines;
}

std::vector<EngineTrajectory> load_cmapss(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open C-MAPSS file " + path.string());
  try {
    return parse_cmapss(in);
  } catch (const ParseError& e) {
    throw ParseError(path.string() + ": " + e.what(), e.line());
  }
}

std::vector<double> parse_rul(std::istream& in) {
  std::vector<double> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto toks = split_ws(line);
    if (toks.empty()) continue;
    double v = 0;
    if (toks.size() != 1 || !parse_double(toks[0], v) || v < 0) {
      throw ParseError("line " + std::to_string(line_no) + ": expected one non-negative RUL value",
                       line_no);
    }
    out.push_back(v);
  }
  return out;
}

std::vector<double> load_rul(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open RUL file " + path.string());
  try {
    return parse_rul(in);
  } catch (const ParseError& e) {
    throw ParseError(path.string() + ": " + e.what(), e.line());
  }
}

SubDataset parse_sub_dataset(std::string_view name) {
  if (name == "FD001") return SubDataset::FD001;
  if (name == "FD002") return SubDataset::FD002;
  if (name == "FD003") return SubDataset::FD003;
  if (name == "FD004") return SubDataset::FD004;
  throw ConfigError("unknown sub-dataset '" + std::string(name) +
                    "' (expected FD001, FD002, FD003 or FD004)");
}

std::string to_string(SubDataset s) {
  switch (s) {
    case SubDataset::FD001: return "FD001";
    case SubDataset::FD002: return "FD002";
    case SubDataset::FD003: return "FD003";
    case SubDataset::FD004: return "FD004";
  }
  return "?";
}

void WindowSizes::validate() const {
  if (small == 0 || !(small < medium && medium < large)) {
    throw ConfigError("window sizes must satisfy 0 < small < medium < large, got " +
                      std::to_string(small) + "/" + std::to_string(medium) + "/" +
                      std::to_string(large));
  }
}

WindowSizes default_window_sizes(SubDataset s) {
  switch (s) {
    case SubDataset::FD001: return {31, 60, 125};
    case SubDataset::FD002: return {21, 75, 125};
    case SubDataset::FD003: return {38, 75, 125};
    case SubDataset::FD004: return {19, 75, 125};
  }
  return {};
}

TrajectoryCounts expected_trajectory_counts(SubDataset s) {
  switch (s) {
    case SubDataset::FD001: return {100, 100};
    case SubDataset::FD002: return {260, 259};
    case SubDataset::FD003: return {100, 100};
    case SubDataset::FD004: return {248, 249};
  }
  return {};
}

CmapssFiles cmapss_files(const std::filesystem::path& dir, SubDataset s) {
  const auto tag = to_string(s);
  return {dir / ("train_" + tag + ".txt"), dir / ("test_" + tag + ".txt"),
          dir / ("RUL_" + tag + ".txt")};
}

}  // namespace tcft
