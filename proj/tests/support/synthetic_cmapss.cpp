#include "synthetic_cmapss.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include <fmt/format.h>

#include "tcft/rng.hpp"

namespace tcft::testing {

namespace {

// Sensors 2,3,4,7,11,12,15,17,20,21 (1-based) trend; 1,5,10,16,18,19 are flat.
const std::vector<std::size_t> kTrending{1, 2, 3, 6, 10, 11, 14, 16, 19, 20};
const std::vector<std::size_t> kFlat{0, 4, 9, 15, 17, 18};

std::vector<CycleRecord> simulate(std::size_t life, Rng& rng, double noise) {
  std::vector<double> offset(kSensorCount);
  for (auto& o : offset) o = rng.uniform(-0.05, 0.05);
  const double rate = rng.uniform(3.0, 5.0);
  std::vector<CycleRecord> rows(life);
  for (std::size_t t = 0; t < life; ++t) {
    auto& r = rows[t];
    r.cycle = static_cast<int>(t + 1);
    for (auto& s : r.settings) s = rng.uniform(-0.001, 0.001);
    const double health = std::exp(rate * (static_cast<double>(t + 1) / life - 1.0));
    for (std::size_t s = 0; s < kSensorCount; ++s) {
      const double base = 100.0 + 10.0 * static_cast<double>(s);
      if (std::find(kFlat.begin(), kFlat.end(), s) != kFlat.end()) {
        r.sensors[s] = base;
      } else if (std::find(kTrending.begin(), kTrending.end(), s) != kTrending.end()) {
        const double sign = (s % 2 == 0) ? 1.0 : -1.0;
        r.sensors[s] = base + offset[s] + sign * 2.0 * health + noise * rng.normal();
      } else {
        r.sensors[s] = base + rng.normal();
      }
    }
  }
  return rows;
}

std::string render(const std::vector<EngineTrajectory>& engines) {
  std::string out;
  for (const auto& e : engines) {
    for (const auto& r : e.rows) {
      out += fmt::format("{} {}", e.unit_id, r.cycle);
      for (double s : r.settings) out += fmt::format(" {:.4f}", s);
      for (double s : r.sensors) out += fmt::format(" {:.4f}", s);
      out += " \n";
    }
  }
  return out;
}

}  // namespace

const std::vector<std::size_t>& trending_sensors() { return kTrending; }

SyntheticCmapss make_synthetic_cmapss(const SyntheticSpec& spec) {
  Rng rng(spec.seed);
  SyntheticCmapss d;
  const auto life = [&] {
    return spec.min_life + static_cast<std::size_t>(rng.below(spec.max_life - spec.min_life + 1));
  };
  for (std::size_t u = 0; u < spec.train_units; ++u) {
    EngineTrajectory e;
    e.unit_id = static_cast<int>(u + 1);
    e.rows = simulate(life(), rng, spec.noise);
    d.train.push_back(std::move(e));
  }
  for (std::size_t u = 0; u < spec.test_units; ++u) {
    const std::size_t full = life();
    auto rows = simulate(full, rng, spec.noise);
    const std::size_t lo = std::min(spec.min_test_length, full - 1);
    const std::size_t cut = lo + static_cast<std::size_t>(rng.below(full - lo));
    rows.resize(cut);
    EngineTrajectory e;
    e.unit_id = static_cast<int>(u + 1);
    e.rows = std::move(rows);
    d.test.push_back(std::move(e));
    d.rul.push_back(static_cast<double>(full - cut));
  }
  // Round-trip the values through the text form so in-memory and parsed
  // trajectories agree exactly.
  d.train_text = render(d.train);
  d.test_text = render(d.test);
  for (double r : d.rul) d.rul_text += fmt::format("{}\n", r);
  std::istringstream tr(d.train_text), te(d.test_text);
  d.train = parse_cmapss(tr);
  d.test = parse_cmapss(te);
  return d;
}

void write_synthetic_files(const std::filesystem::path& dir, const std::string& name,
                           const SyntheticCmapss& data) {
  std::filesystem::create_directories(dir);
  std::ofstream(dir / ("train_" + name + ".txt")) << data.train_text;
  std::ofstream(dir / ("test_" + name + ".txt")) << data.test_text;
  std::ofstream(dir / ("RUL_" + name + ".txt")) << data.rul_text;
}

}  // namespace tcft::testing
