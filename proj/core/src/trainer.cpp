#include "tcft/trainer.hpp"

#include <chrono>
#include <cmath>
#include <numeric>

#include <fmt/format.h>

#include "tcft/errors.hpp"
#include "tcft/metrics.hpp"
#include "tcft/ops.hpp"

namespace tcft {

void TrainConfig::validate() const {
  if (!(learning_rate > 0.0)) throw ConfigError("learning_rate must be positive");
  if (!(weight_decay >= 0.0)) throw ConfigError("weight_decay must be non-negative");
  if (epochs < 1) throw ConfigError("epochs must be at least 1");
  if (batch_size < 1) throw ConfigError("batch_size must be at least 1");
  if (!(dropout >= 0.0 && dropout < 1.0)) throw ConfigError("dropout must lie in [0, 1)");
  if (!(beta1 >= 0.0 && beta1 < 1.0) || !(beta2 >= 0.0 && beta2 < 1.0))
    throw ConfigError("Adam betas must lie in [0, 1)");
  if (!(epsilon > 0.0)) throw ConfigError("Adam epsilon must be positive");
}

AdamConfig TrainConfig::adam() const {
  return AdamConfig{learning_rate, beta1, beta2, epsilon, weight_decay};
}

double TrainResult::mean_epoch_seconds() const {
  if (epoch_seconds.empty()) return 0.0;
  return std::accumulate(epoch_seconds.begin(), epoch_seconds.end(), 0.0) /
         static_cast<double>(epoch_seconds.size());
}

double parameter_norm(const ParameterList& params) {
  double s = 0.0;
  for (const auto& p : params)
    for (double v : p.tensor.values()) s += v * v;
  return std::sqrt(s);
}

SequenceBatch batch_inputs(const WindowDataset& data, std::span<const std::size_t> indices) {
  const std::size_t C = data.channels, T = data.window;
  std::vector<double> packed(indices.size() * T * C);
  for (std::size_t b = 0; b < indices.size(); ++b) {
    const auto& f = data.samples.at(indices[b]).features;
    if (f.size() != C * T)
      throw DataError(fmt::format("sample {} has {} features, expected {}", indices[b], f.size(),
                                  C * T));
    for (std::size_t c = 0; c < C; ++c)
      for (std::size_t t = 0; t < T; ++t) packed[(b * T + t) * C + c] = f[c * T + t];
  }
  return SequenceBatch{Tensor::from({indices.size() * T, C}, std::move(packed)), indices.size(),
                       T};
}

TrainResult train_one_window(TcftBedModel& model, const WindowDataset& data,
                             const TrainConfig& config, Rng& rng, const EpochObserver& observer) {
  config.validate();
  if (data.empty()) throw ContractError("train_one_window: empty dataset");
  if (data.channels != model.config().input_channels)
    throw ContractError(fmt::format("dataset has {} channels, model expects {}", data.channels,
                                    model.config().input_channels));

  const AdamConfig adam = config.adam();
  AdamState state;
  std::size_t step = 0;
  std::vector<std::size_t> order(data.size());
  std::iota(order.begin(), order.end(), std::size_t{0});

  TrainResult result;
  for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
    const auto start = std::chrono::steady_clock::now();
    rng.shuffle(order);
    double weighted = 0.0;
    std::size_t batch_index = 0;
    for (std::size_t first = 0; first < order.size(); first += config.batch_size, ++batch_index) {
      const std::size_t count = std::min(config.batch_size, order.size() - first);
      const std::span<const std::size_t> idx(order.data() + first, count);
      std::vector<double> labels(count);
      for (std::size_t i = 0; i < count; ++i) labels[i] = data.samples[idx[i]].label;

      model.zero_grad();
      const Tensor pred = model.forward(batch_inputs(data, idx), ForwardMode{true, &rng});
      const Tensor loss = mse_loss(pred, labels);
      const double value = loss.item();
      if (!std::isfinite(value))
        throw NonFiniteError(fmt::format(
            "non-finite loss at epoch {} batch {} (parameter norm {:.6g})", epoch, batch_index,
            parameter_norm(model.parameters())));
      loss.backward();
      adam_step(model.parameters(), state, ++step, adam);
      weighted += value * static_cast<double>(count);
    }
    model.zero_grad();
    const double seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const double epoch_loss = weighted / static_cast<double>(order.size());
    result.loss_curve.push_back(epoch_loss);
    result.epoch_seconds.push_back(seconds);
    if (observer) observer(EpochRecord{epoch, epoch_loss, seconds});
  }
  return result;
}

std::vector<double> predict(const TcftBedModel& model, const WindowDataset& data,
                            std::size_t batch_size) {
  if (batch_size < 1) throw ContractError("predict: batch_size must be positive");
  NoGradGuard no_grad;
  std::vector<double> out;
  out.reserve(data.size());
  std::vector<std::size_t> idx;
  for (std::size_t first = 0; first < data.size(); first += batch_size) {
    const std::size_t count = std::min(batch_size, data.size() - first);
    idx.resize(count);
    std::iota(idx.begin(), idx.end(), first);
    const Tensor pred = model.forward(batch_inputs(data, idx), ForwardMode{false, nullptr});
    const auto v = pred.values();
    out.insert(out.end(), v.begin(), v.end());
  }
  return out;
}

SizePredictions predict_size(const TcftBedModel& model, const WindowDataset& test) {
  SizePredictions s;
  s.window = test.window;
  s.predictions = predict(model, test);
  for (const auto& sample : test.samples) {
    s.unit_ids.push_back(sample.unit_id);
    s.labels.push_back(sample.label);
  }
  return s;
}

}  // namespace tcft
