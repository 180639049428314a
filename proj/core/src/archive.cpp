#include "tcft/archive.hpp"

#include <fmt/format.h>

#include <cstring>
#include <fstream>
#include <sstream>

#include "tcft/checkpoint.hpp"
#include "tcft/errors.hpp"

namespace tcft {

namespace fs = std::filesystem;

namespace {

constexpr char kWindowMagic[8] = {'T', 'C', 'F', 'T', 'W', 'I', 'N', '1'};

std::string window_file_name(Split split, std::size_t w) {
  return fmt::format("{}_w{}.bin", split == Split::train ? "train" : "test", w);
}

template <class T>
void put(std::vector<std::uint8_t>& out, T v) {
  const auto* p = reinterpret_cast<const std::uint8_t*>(&v);
  out.insert(out.end(), p, p + sizeof(T));
}

template <class T>
T get(std::span<const std::uint8_t> bytes, std::size_t& pos) {
  if (pos + sizeof(T) > bytes.size()) throw ParseError("window file truncated", 0);
  T v;
  std::memcpy(&v, bytes.data() + pos, sizeof(T));
  pos += sizeof(T);
  return v;
}

std::map<std::string, std::string> parse_manifest(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("no dataset archive at " + path.parent_path().string() + " (run `tcftbed prepare` first)");
  std::map<std::string, std::string> kv;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    const auto eq = line.find(" = ");
    if (eq == std::string::npos) continue;
    kv[line.substr(0, eq)] = line.substr(eq + 3);
  }
  return kv;
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, sep))
    if (!item.empty()) out.push_back(item);
  return out;
}

const std::string& need(const std::map<std::string, std::string>& kv, const std::string& key) {
  auto it = kv.find(key);
  if (it == kv.end()) throw ParseError("archive manifest lacks '" + key + "'", 0);
  return it->second;
}

}  // namespace

std::string sensor_name(std::size_t sensor) { return fmt::format("s{}", sensor + 1); }

std::size_t PreparedDataset::test_engine_count() const {
  std::size_t n = 0;
  for (const auto& d : test) n += d.size();
  return n;
}

PreparedDataset prepare_dataset(SubDataset sub, std::span<const EngineTrajectory> train,
                                std::span<const EngineTrajectory> test,
                                std::span<const double> final_rul, const WindowSizes& sizes,
                                double tau_c, double tau_m) {
  sizes.validate();
  PreparedDataset out;
  out.sub_dataset = sub;
  out.sizes = sizes;
  out.selection = select_sensors(train, tau_c, tau_m);
  out.normalization = fit_normalization(train, out.selection.selected);
  for (auto w : sizes.ascending()) out.train.push_back(build_train_dataset(train, out.normalization, w));
  out.test = assign_test_windows(test, final_rul, out.normalization, sizes);
  return out;
}

std::string archive_manifest_text(const PreparedDataset& d) {
  std::string s;
  auto line = [&s](const std::string& k, const std::string& v) { s += k + " = " + v + "\n"; };
  line("format", "tcft-window-archive/1");
  line("sub_dataset", to_string(d.sub_dataset));
  line("window_sizes", fmt::format("{},{},{}", d.sizes.small, d.sizes.medium, d.sizes.large));
  line("tau_c", fmt::format("{:.17g}", d.selection.tau_c));
  line("tau_m", fmt::format("{:.17g}", d.selection.tau_m));
  line("rul_cap", fmt::format("{:g}", kRulCap));
  line("input_hash", d.input_hash.empty() ? "-" : d.input_hash);
  std::string sel;
  for (auto sensor : d.selection.selected) sel += (sel.empty() ? "" : ",") + sensor_name(sensor);
  line("selected_sensors", sel);
  for (const auto& st : d.selection.stats) {
    line("sensor." + sensor_name(st.sensor),
         fmt::format("r={:.17g},m={:.17g},selected={}", st.r, st.m, st.selected ? 1 : 0));
  }
  for (std::size_t k = 0; k < d.normalization.sensors.size(); ++k) {
    line("norm." + sensor_name(d.normalization.sensors[k]),
         fmt::format("{:.17g},{:.17g}", d.normalization.min[k], d.normalization.max[k]));
  }
  for (const auto& ds : d.train) line(fmt::format("train.w{}", ds.window), std::to_string(ds.size()));
  for (const auto& ds : d.test) line(fmt::format("test.w{}", ds.window), std::to_string(ds.size()));
  return s;
}

void write_window_file(const fs::path& path, const WindowDataset& ds) {
  std::vector<std::uint8_t> out;
  out.insert(out.end(), kWindowMagic, kWindowMagic + sizeof(kWindowMagic));
  put<std::uint64_t>(out, ds.size());
  put<std::uint64_t>(out, ds.channels);
  put<std::uint64_t>(out, ds.window);
  for (const auto& s : ds.samples) {
    put<std::int32_t>(out, s.unit_id);
    put<std::int32_t>(out, s.end_cycle);
    put<double>(out, s.label);
  }
  for (const auto& s : ds.samples)
    for (double v : s.features) put<double>(out, v);
  write_file_bytes(path, out);
}

WindowDataset read_window_file(const fs::path& path, Split split) {
  const auto bytes = read_file_bytes(path);
  if (bytes.size() < sizeof(kWindowMagic) ||
      std::memcmp(bytes.data(), kWindowMagic, sizeof(kWindowMagic)) != 0) {
    throw ParseError(path.string() + ": not a window file", 0);
  }
  std::size_t pos = sizeof(kWindowMagic);
  WindowDataset ds;
  ds.split = split;
  const auto n = get<std::uint64_t>(bytes, pos);
  ds.channels = get<std::uint64_t>(bytes, pos);
  ds.window = get<std::uint64_t>(bytes, pos);
  ds.samples.resize(n);
  for (auto& s : ds.samples) {
    s.unit_id = get<std::int32_t>(bytes, pos);
    s.end_cycle = get<std::int32_t>(bytes, pos);
    s.label = get<double>(bytes, pos);
  }
  for (auto& s : ds.samples) {
    s.features.resize(ds.channels * ds.window);
    for (auto& v : s.features) v = get<double>(bytes, pos);
  }
  if (pos != bytes.size()) throw ParseError(path.string() + ": trailing bytes", 0);
  return ds;
}

void write_archive(const fs::path& dir, const PreparedDataset& d) {
  fs::create_directories(dir);
  for (const auto& ds : d.train) write_window_file(dir / window_file_name(Split::train, ds.window), ds);
  for (const auto& ds : d.test) write_window_file(dir / window_file_name(Split::test, ds.window), ds);
  // Manifest last: its presence marks a complete archive.
  std::ofstream(dir / "manifest.txt", std::ios::trunc) << archive_manifest_text(d);
}

PreparedDataset read_archive(const fs::path& dir) {
  const auto kv = parse_manifest(dir / "manifest.txt");
  if (need(kv, "format") != "tcft-window-archive/1") {
    throw ParseError("unsupported archive format '" + need(kv, "format") + "'", 0);
  }
  PreparedDataset d;
  d.sub_dataset = parse_sub_dataset(need(kv, "sub_dataset"));
  const auto sizes = split(need(kv, "window_sizes"), ',');
  if (sizes.size() != 3) throw ParseError("archive manifest: window_sizes needs three values", 0);
  d.sizes = {std::stoul(sizes[0]), std::stoul(sizes[1]), std::stoul(sizes[2])};
  d.selection.tau_c = std::stod(need(kv, "tau_c"));
  d.selection.tau_m = std::stod(need(kv, "tau_m"));
  d.input_hash = need(kv, "input_hash") == "-" ? "" : need(kv, "input_hash");
  for (std::size_t s = 0; s < kSensorCount; ++s) {
    const auto fields = split(need(kv, "sensor." + sensor_name(s)), ',');
    SensorStatistic st;
    st.sensor = s;
    for (const auto& f : fields) {
      if (f.rfind("r=", 0) == 0) st.r = std::stod(f.substr(2));
      else if (f.rfind("m=", 0) == 0) st.m = std::stod(f.substr(2));
      else if (f.rfind("selected=", 0) == 0) st.selected = f.substr(9) == "1";
    }
    if (st.selected) d.selection.selected.push_back(s);
    d.selection.stats.push_back(st);
  }
  for (auto s : d.selection.selected) {
    const auto mm = split(need(kv, "norm." + sensor_name(s)), ',');
    if (mm.size() != 2) throw ParseError("archive manifest: bad norm entry for " + sensor_name(s), 0);
    d.normalization.sensors.push_back(s);
    d.normalization.min.push_back(std::stod(mm[0]));
    d.normalization.max.push_back(std::stod(mm[1]));
  }
  for (auto w : d.sizes.ascending()) {
    d.train.push_back(read_window_file(dir / window_file_name(Split::train, w), Split::train));
    d.test.push_back(read_window_file(dir / window_file_name(Split::test, w), Split::test));
  }
  return d;
}

}  // namespace tcft
