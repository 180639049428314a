#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "tcft/cmapss.hpp"
#include "tcft/metrics.hpp"
#include "tcft/model.hpp"
#include "tcft/trainer.hpp"

namespace tcft::cli {

// One declarative run description. Command-line flags override it.
struct RunConfig {
  SubDataset sub_dataset = SubDataset::FD001;
  // Either a directory holding train_/test_/RUL_FD00x.txt, or explicit files.
  std::optional<std::filesystem::path> data_dir;
  std::optional<std::filesystem::path> train_file, test_file, rul_file;
  std::optional<WindowSizes> window_sizes;  // defaults per sub-dataset
  double tau_c = 0.5;
  double tau_m = 0.5;
  TrainConfig train;
  ModelConfig model;  // input_channels is taken from the prepared archive
  std::string variant = "full";
  std::vector<std::string> variants;  // ablate; empty means {variant}
  ScoreConvention score = ScoreConvention::standard;
  std::filesystem::path out = "tcft_run";
  std::uint64_t seed = 0;

  WindowSizes sizes() const;
  CmapssFiles data_files() const;  // throws ConfigError when no data is configured
  std::vector<std::string> ablation_variants() const;
  // Canonical JSON echo for manifests; paths as given.
  std::string to_json() const;
};

// Unknown keys, wrong types, out-of-range values and missing referenced
// paths are ConfigErrors. Relative paths resolve against `base_dir`.
RunConfig parse_run_config(const std::string& text,
                           const std::filesystem::path& base_dir = std::filesystem::path());
RunConfig load_run_config(const std::filesystem::path& path);

}  // namespace tcft::cli
