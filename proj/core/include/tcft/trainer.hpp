#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "tcft/metrics.hpp"
#include "tcft/model.hpp"
#include "tcft/optim.hpp"
#include "tcft/rng.hpp"
#include "tcft/windows.hpp"

namespace tcft {

struct TrainConfig {
  double learning_rate = 1e-3;
  double weight_decay = 1e-5;
  std::size_t epochs = 100;
  std::size_t batch_size = 64;
  std::uint64_t seed = 0;
  double dropout = 0.2;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;

  // Throws ConfigError unless every field is in range.
  void validate() const;
  AdamConfig adam() const;
};

struct EpochRecord {
  std::size_t epoch = 0;  // 1-based
  double loss = 0.0;      // sample-weighted mean training MSE over the epoch
  double seconds = 0.0;
};

struct TrainResult {
  std::vector<double> loss_curve;
  std::vector<double> epoch_seconds;

  double mean_epoch_seconds() const;
};

using EpochObserver = std::function<void(const EpochRecord&)>;

// Gathers the listed samples into the model's sample-major input layout.
SequenceBatch batch_inputs(const WindowDataset& data, std::span<const std::size_t> indices);

// Mini-batch Adam on MSE. Each epoch shuffles with `rng`, which also drives
// dropout. Throws NonFiniteError naming the epoch, batch and parameter norm
// when the loss stops being finite.
TrainResult train_one_window(TcftBedModel& model, const WindowDataset& data,
                             const TrainConfig& config, Rng& rng,
                             const EpochObserver& observer = {});

// Inference-mode predictions in sample order.
std::vector<double> predict(const TcftBedModel& model, const WindowDataset& data,
                            std::size_t batch_size = 64);

SizePredictions predict_size(const TcftBedModel& model, const WindowDataset& test);

double parameter_norm(const ParameterList& params);

}  // namespace tcft
