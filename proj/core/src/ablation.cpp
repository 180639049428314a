#include "tcft/ablation.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <mutex>
#include <optional>
#include <thread>

#include <fmt/format.h>

#include "tcft/errors.hpp"
#include "tcft/init.hpp"

namespace tcft {

namespace {

constexpr std::size_t kDilationRates[] = {1, 2, 4, 8, 16};

std::optional<std::size_t> suffix_number(std::string_view name, std::string_view prefix) {
  if (!name.starts_with(prefix)) return std::nullopt;
  const auto digits = name.substr(prefix.size());
  if (digits.empty() || digits.size() > 3) return std::nullopt;
  std::size_t v = 0;
  for (char ch : digits) {
    if (ch < '0' || ch > '9') return std::nullopt;
    v = v * 10 + static_cast<std::size_t>(ch - '0');
  }
  return v;
}

}  // namespace

std::string AblationSpec::name() const {
  switch (variant) {
    case Variant::full: return "full";
    case Variant::no_tcn: return "no_tcn";
    case Variant::attention_replaced_ff: return "attention_replaced_ff";
    case Variant::encoder_decoder_case:
      return fmt::format("encoder_decoder_case_{}", encoder_decoder_case);
    case Variant::dilation_rate: return fmt::format("dilation_rate_{}", dilation_rate);
    case Variant::original_tft_baseline: return "original_tft_baseline";
    case Variant::pure_tcn_baseline: return "pure_tcn_baseline";
    case Variant::modified_tft_only: return "modified_tft_only";
  }
  return "full";
}

std::vector<std::string> valid_variant_names() {
  std::vector<std::string> names{"full", "no_tcn", "attention_replaced_ff"};
  for (int c = 1; c <= 4; ++c) names.push_back(fmt::format("encoder_decoder_case_{}", c));
  for (auto r : kDilationRates) names.push_back(fmt::format("dilation_rate_{}", r));
  names.insert(names.end(), {"original_tft_baseline", "pure_tcn_baseline", "modified_tft_only"});
  return names;
}

AblationSpec AblationSpec::parse(std::string_view name) {
  AblationSpec s;
  if (name == "full") return s;
  if (name == "no_tcn") { s.variant = Variant::no_tcn; return s; }
  if (name == "attention_replaced_ff") { s.variant = Variant::attention_replaced_ff; return s; }
  if (name == "original_tft_baseline") { s.variant = Variant::original_tft_baseline; return s; }
  if (name == "pure_tcn_baseline") { s.variant = Variant::pure_tcn_baseline; return s; }
  if (name == "modified_tft_only") { s.variant = Variant::modified_tft_only; return s; }
  if (auto c = suffix_number(name, "encoder_decoder_case_"); c && *c >= 1 && *c <= 4) {
    s.variant = Variant::encoder_decoder_case;
    s.encoder_decoder_case = static_cast<int>(*c);
    return s;
  }
  if (auto r = suffix_number(name, "dilation_rate_");
      r && std::find(std::begin(kDilationRates), std::end(kDilationRates), *r) !=
               std::end(kDilationRates)) {
    s.variant = Variant::dilation_rate;
    s.dilation_rate = *r;
    return s;
  }
  throw ConfigError(fmt::format("unknown variant '{}'; valid variants: {}", name,
                                fmt::join(valid_variant_names(), ", ")));
}

std::vector<std::size_t> dilation_schedule(std::size_t rate, std::size_t layers,
                                           std::size_t window) {
  std::vector<std::size_t> d;
  std::size_t v = rate;
  for (std::size_t i = 0; i < layers; ++i, v *= 2) d.push_back(std::min(v, std::max<std::size_t>(window, 1)));
  return d;
}

ModelConfig variant_config(const ModelConfig& base, const AblationSpec& spec, std::size_t window) {
  ModelConfig c = base;
  const std::size_t layers = base.dilations.empty() ? 5 : base.dilations.size();
  c.dilations = dilation_schedule(1, layers, window);
  switch (spec.variant) {
    case Variant::full: break;
    case Variant::no_tcn:
    case Variant::modified_tft_only: c.use_tcn = false; break;
    case Variant::attention_replaced_ff: c.mixer = MixerKind::feed_forward; break;
    case Variant::encoder_decoder_case: {
      const int k = spec.encoder_decoder_case;
      if (k < 1 || k > 4) throw ConfigError(fmt::format("encoder/decoder case {} is not 1..4", k));
      c.encoder = k <= 2 ? RecurrentKind::bidirectional : RecurrentKind::unidirectional;
      c.decoder = k % 2 == 1 ? RecurrentKind::bidirectional : RecurrentKind::unidirectional;
      break;
    }
    case Variant::dilation_rate:
      c.dilations = dilation_schedule(spec.dilation_rate, layers, window);
      break;
    case Variant::original_tft_baseline:
      c.use_tcn = false;
      c.static_enrichment = true;
      break;
    case Variant::pure_tcn_baseline:
      c.use_tcn = true;
      c.use_sequence_stack = false;
      break;
  }
  c.validate();
  return c;
}

void parallel_for(std::size_t count, std::size_t jobs,
                  const std::function<void(std::size_t)>& task) {
  jobs = std::clamp<std::size_t>(jobs, 1, std::max<std::size_t>(count, 1));
  if (jobs == 1) {
    for (std::size_t i = 0; i < count; ++i) task(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::thread> workers;
  for (std::size_t w = 0; w < jobs; ++w) {
    workers.emplace_back([&] {
      for (std::size_t i; (i = next.fetch_add(1)) < count;) {
        try {
          task(i);
        } catch (...) {
          std::lock_guard lock(failure_mutex);
          if (!failure) failure = std::current_exception();
          next = count;
        }
      }
    });
  }
  for (auto& t : workers) t.join();
  if (failure) std::rethrow_exception(failure);
}

std::vector<WindowRun> train_multi_window(const PreparedDataset& data, const ModelConfig& base,
                                          const AblationSpec& spec, const TrainConfig& config,
                                          std::size_t jobs, const ProgressObserver& observer) {
  config.validate();
  const auto windows = data.sizes.ascending();
  if (data.train.size() != windows.size())
    throw DataError(fmt::format("expected {} training datasets, found {}", windows.size(),
                                data.train.size()));
  ModelConfig shared = base;
  shared.input_channels = data.channels();
  shared.dropout = config.dropout;

  std::vector<std::optional<WindowRun>> slots(windows.size());
  // Forked up front: fork() advances the root stream.
  Rng root(config.seed);
  std::vector<Rng> streams;
  for (std::size_t i = 0; i < windows.size(); ++i) streams.push_back(root.fork(i));
  parallel_for(windows.size(), jobs, [&](std::size_t i) {
    const std::size_t w = windows[i];
    Rng& rng = streams[i];
    TcftBedModel model(variant_config(shared, spec, w));
    xavier_uniform_init(model, rng);
    EpochObserver forward;
    if (observer) forward = [&, w](const EpochRecord& r) { observer(WindowProgress{w, r}); };
    TrainResult result = train_one_window(model, data.train[i], config, rng, forward);
    slots[i].emplace(WindowRun{w, std::move(model), std::move(result)});
  });

  std::vector<WindowRun> runs;
  for (auto& s : slots) runs.push_back(std::move(*s));
  return runs;
}

Evaluation evaluate_models(const std::vector<const TcftBedModel*>& models,
                           const PreparedDataset& data, ScoreConvention convention) {
  if (models.size() != data.test.size())
    throw ContractError(fmt::format("{} models for {} test datasets", models.size(),
                                    data.test.size()));
  Evaluation e;
  std::vector<int> units;
  for (std::size_t i = 0; i < models.size(); ++i) {
    e.predictions.push_back(predict_size(*models[i], data.test[i]));
    const auto& ids = e.predictions.back().unit_ids;
    units.insert(units.end(), ids.begin(), ids.end());
  }
  std::sort(units.begin(), units.end());
  units.erase(std::unique(units.begin(), units.end()), units.end());
  if (units.size() != data.test_engine_count())
    throw CoverageError(fmt::format("test datasets cover {} distinct engines, expected {}",
                                    units.size(), data.test_engine_count()));
  e.report = evaluate_multi_window(e.predictions, units, convention);
  return e;
}

AblationResult run_ablation(const AblationSpec& spec, const PreparedDataset& data,
                            const ModelConfig& base, const TrainConfig& config, std::size_t jobs,
                            ScoreConvention convention, const ProgressObserver& observer) {
  auto runs = train_multi_window(data, base, spec, config, jobs, observer);
  std::vector<const TcftBedModel*> models;
  double seconds = 0.0;
  std::size_t epochs = 0;
  for (const auto& r : runs) {
    models.push_back(&r.model);
    for (double s : r.training.epoch_seconds) seconds += s;
    epochs += r.training.epoch_seconds.size();
  }
  AblationResult out;
  out.variant = spec.name();
  out.report = evaluate_models(models, data, convention).report;
  out.parameters = runs.back().model.parameter_count();
  out.mean_epoch_seconds = epochs ? seconds / static_cast<double>(epochs) : 0.0;
  return out;
}

}  // namespace tcft
