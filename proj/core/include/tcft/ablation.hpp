#pragma once

#include <cstddef>
#include <functional>
#include <string>
#include <string_view>
#include <vector>

#include "tcft/archive.hpp"
#include "tcft/metrics.hpp"
#include "tcft/model.hpp"
#include "tcft/trainer.hpp"

namespace tcft {

enum class Variant {
  full,
  no_tcn,
  attention_replaced_ff,
  encoder_decoder_case,
  dilation_rate,
  original_tft_baseline,
  pure_tcn_baseline,
  modified_tft_only,
};

struct AblationSpec {
  Variant variant = Variant::full;
  int encoder_decoder_case = 1;  // 1..4: Bi/Bi, Bi/Uni, Uni/Bi, Uni/Uni
  std::size_t dilation_rate = 1;  // one of 1, 2, 4, 8, 16

  // Canonical names: full, no_tcn, attention_replaced_ff,
  // encoder_decoder_case_<1..4>, dilation_rate_<1|2|4|8|16>,
  // original_tft_baseline, pure_tcn_baseline, modified_tft_only.
  std::string name() const;
  // Throws ConfigError listing every valid name.
  static AblationSpec parse(std::string_view name);
};

std::vector<std::string> valid_variant_names();

// Dilations {rate * 2^i} for i < layers, each capped at `window`.
std::vector<std::size_t> dilation_schedule(std::size_t rate, std::size_t layers,
                                           std::size_t window);

// The variant's architecture for one window length, starting from `base`.
ModelConfig variant_config(const ModelConfig& base, const AblationSpec& spec, std::size_t window);

struct WindowRun {
  std::size_t window = 0;
  TcftBedModel model;
  TrainResult training;
};

struct WindowProgress {
  std::size_t window = 0;
  EpochRecord epoch;
};
using ProgressObserver = std::function<void(const WindowProgress&)>;

// Trains one freshly initialized model per window size. Size i draws all of
// its randomness from the i-th fork of Rng(config.seed), so results do not depend on
// `jobs`, the number of worker threads. The observer may be called from
// several threads at once.
std::vector<WindowRun> train_multi_window(const PreparedDataset& data, const ModelConfig& base,
                                          const AblationSpec& spec, const TrainConfig& config,
                                          std::size_t jobs = 1,
                                          const ProgressObserver& observer = {});

struct Evaluation {
  MetricsReport report;
  std::vector<SizePredictions> predictions;
};

// Models are matched to test datasets by position (small, medium, large).
Evaluation evaluate_models(const std::vector<const TcftBedModel*>& models,
                           const PreparedDataset& data,
                           ScoreConvention convention = ScoreConvention::standard);

struct AblationResult {
  std::string variant;
  MetricsReport report;
  std::size_t parameters = 0;  // of the largest-window model
  double mean_epoch_seconds = 0.0;
};

AblationResult run_ablation(const AblationSpec& spec, const PreparedDataset& data,
                            const ModelConfig& base, const TrainConfig& config,
                            std::size_t jobs = 1,
                            ScoreConvention convention = ScoreConvention::standard,
                            const ProgressObserver& observer = {});

// Parallel for over [0, count) with at most `jobs` threads. The first
// exception thrown by any task is rethrown after all threads join.
void parallel_for(std::size_t count, std::size_t jobs, const std::function<void(std::size_t)>& task);

}  // namespace tcft
