#pragma once

#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "tcft/cmapss.hpp"
#include "tcft/selection.hpp"
#include "tcft/windows.hpp"

namespace tcft {

// Everything the training and evaluation stages need for one sub-dataset.
struct PreparedDataset {
  SubDataset sub_dataset = SubDataset::FD001;
  WindowSizes sizes;
  SensorSelection selection;
  NormalizationStats normalization;
  std::vector<WindowDataset> train;  // small, medium, large
  std::vector<WindowDataset> test;   // small, medium, large
  std::string input_hash;

  std::size_t channels() const { return normalization.sensors.size(); }
  std::size_t test_engine_count() const;
};

// Selection and normalization are fitted on `train` only.
PreparedDataset prepare_dataset(SubDataset sub, std::span<const EngineTrajectory> train,
                                std::span<const EngineTrajectory> test,
                                std::span<const double> final_rul, const WindowSizes& sizes,
                                double tau_c, double tau_m);

// Directory layout:
//   manifest.txt            sub-dataset, sizes, thresholds, sensor statistics,
//                           normalization min/max, per-size counts
//   train_w<size>.bin       "TCFTWIN1" | u64 n | u64 channels | u64 window
//   test_w<size>.bin          | n x (i32 unit, i32 end_cycle, f64 label)
//                             | f64 features [n x channels x window]
void write_archive(const std::filesystem::path& dir, const PreparedDataset& data);
PreparedDataset read_archive(const std::filesystem::path& dir);

std::string archive_manifest_text(const PreparedDataset& data);

void write_window_file(const std::filesystem::path& path, const WindowDataset& ds);
WindowDataset read_window_file(const std::filesystem::path& path, Split split);

std::string sensor_name(std::size_t sensor);

}  // namespace tcft
