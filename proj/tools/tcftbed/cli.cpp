#include "cli.hpp"

#include <fstream>
#include <mutex>
#include <optional>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <fmt/ostream.h>
#include <fmt/ranges.h>

#include "tcft/ablation.hpp"
#include "tcft/archive.hpp"
#include "tcft/checkpoint.hpp"
#include "tcft/content_hash.hpp"
#include "tcft/errors.hpp"

namespace tcft::cli {

namespace fs = std::filesystem;

namespace {

constexpr const char* kMetricsHeader =
    "sub_dataset,window_size,rmse,score,mae,r2,n,params,epoch_time_s";
constexpr const char* kAblationHeader =
    "variant,sub_dataset,rmse,score,mae,r2,n,params,epoch_time_s";
constexpr const char* kPredictionsHeader = "unit_id,window_size,true_rul,predicted_rul";

const char* size_name(std::size_t index) {
  static const char* names[] = {"small", "medium", "large"};
  return names[index];
}

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  f << text;
  if (!f) throw std::runtime_error("cannot write " + path.string());
}

std::size_t count_lines(const fs::path& path) {
  std::ifstream f(path);
  std::size_t n = 0;
  for (std::string line; std::getline(f, line);) n += !line.empty();
  return n;
}

// Written before any artifact with status = incomplete, rewritten with
// status = complete once every output has been validated.
class RunManifest {
 public:
  RunManifest(const RunConfig& c, std::string command)
      : path_(manifest_path(c, command)), command_(std::move(command)) {
    set("command", command_);
    set("sub_dataset", to_string(c.sub_dataset));
    set("seed", std::to_string(c.seed));
    const auto s = c.sizes();
    set("window_sizes", fmt::format("{},{},{}", s.small, s.medium, s.large));
    set("tau_c", fmt::format("{}", c.tau_c));
    set("tau_m", fmt::format("{}", c.tau_m));
    set("batch_size", std::to_string(c.train.batch_size));
    set("adam", fmt::format("beta1={} beta2={} epsilon={}", c.train.beta1, c.train.beta2,
                            c.train.epsilon));
    set("weight_decay_mode", "coupled_l2");
    set("score_convention", to_string(c.score));
    if (c.score == ScoreConvention::standard)
      set("score_note", "late predictions (d >= 0) cost exp(d/10) - 1, early ones exp(-d/13) - 1");
    set("config", c.to_json());
    write("incomplete");
  }

  void set(const std::string& key, const std::string& value) {
    for (auto& [k, v] : entries_) {
      if (k == key) {
        v = value;
        return;
      }
    }
    entries_.emplace_back(key, value);
  }

  void complete() { write("complete"); }

 private:
  void write(const char* status) {
    std::string text = fmt::format("status = {}\n", status);
    for (const auto& [k, v] : entries_) text += fmt::format("{} = {}\n", k, v);
    write_text(path_, text);
  }

  fs::path path_;
  std::string command_;
  std::vector<std::pair<std::string, std::string>> entries_;
};

std::vector<EngineTrajectory> load_with_context(const fs::path& path) {
  try {
    return load_cmapss(path);
  } catch (const ParseError& e) {
    throw ParseError(fmt::format("{}: {}", path.string(), e.what()), e.line());
  }
}

PreparedDataset open_archive(const RunConfig& c) {
  const auto dir = archive_dir(c);
  if (!fs::exists(dir / "manifest.txt"))
    throw DataError(fmt::format("no dataset archive at {}; run `tcftbed prepare` first",
                                dir.string()));
  return read_archive(dir);
}

ModelConfig model_for(const RunConfig& c, const PreparedDataset& data) {
  ModelConfig m = c.model;
  m.input_channels = data.channels();
  m.dropout = c.train.dropout;
  return m;
}

std::string metrics_row(const std::string& sub, const GroupMetrics& g, std::size_t params) {
  // A size that received no test engines has no defined error.
  if (g.n == 0) return fmt::format("{},{},,,,,0,{},\n", sub, g.group, params);
  return fmt::format("{},{},{:.6f},{:.6f},{:.6f},{:.6f},{},{},\n", sub, g.group, g.rmse, g.score,
                     g.mae, g.r_squared, g.n, params);
}

void print_group(std::ostream& out, const std::string& label, const GroupMetrics& g) {
  const std::string window = g.group == "concat" ? "" : g.group;
  if (g.n == 0) {
    fmt::print(out, "{:<8}{:>7}{:>10}{:>12}{:>10}{:>8}{:>6}\n", label, window, "-", "-", "-", "-", 0);
    return;
  }
  fmt::print(out, "{:<8}{:>7}{:>10.3f}{:>12.3f}{:>10.3f}{:>8.3f}{:>6}\n", label, window, g.rmse,
             g.score, g.mae, g.r_squared, g.n);
}

void print_progress(std::ostream& out, std::mutex& m, const WindowProgress& p,
                    std::size_t epochs) {
  std::lock_guard lock(m);
  fmt::print(out, "  w={:<4} epoch {:>4}/{} loss {:.4f} ({:.2f}s)\n", p.window, p.epoch.epoch,
             epochs, p.epoch.loss, p.epoch.seconds);
  out.flush();
}

}  // namespace

fs::path archive_dir(const RunConfig& c) { return c.out / "archive"; }

fs::path checkpoint_path(const RunConfig& c, std::size_t window) {
  return c.out / "checkpoints" / fmt::format("w{}.ckpt", window);
}

fs::path manifest_path(const RunConfig& c, const std::string& command) {
  return c.out / fmt::format("manifest_{}.txt", command);
}

int cmd_prepare(const RunConfig& c, std::ostream& out) {
  const auto files = c.data_files();
  for (const auto& p : {files.train, files.test, files.rul})
    if (!fs::exists(p)) throw DataError(fmt::format("input file {} does not exist", p.string()));
  RunManifest manifest(c, "prepare");

  const auto train = load_with_context(files.train);
  const auto test = load_with_context(files.test);
  const auto rul = load_rul(files.rul);
  if (rul.size() != test.size())
    throw DataError(fmt::format("{} lists {} RUL values for {} test engines", files.rul.string(),
                                rul.size(), test.size()));

  auto data = prepare_dataset(c.sub_dataset, train, test, rul, c.sizes(), c.tau_c, c.tau_m);
  data.input_hash = combined_hash({files.train, files.test, files.rul});
  write_archive(archive_dir(c), data);

  const auto expected = expected_trajectory_counts(c.sub_dataset);
  fmt::print(out, "{}: {} training and {} test trajectories", to_string(c.sub_dataset),
             train.size(), test.size());
  if (train.size() != expected.train || test.size() != expected.test)
    fmt::print(out, " (the benchmark distribution has {}/{})", expected.train, expected.test);
  fmt::print(out, "\n\n{:<7}{:>10}{:>10}{:>10}  {}\n", "sensor", "r", "M", "strength", "selected");
  for (const auto& s : data.selection.stats)
    fmt::print(out, "{:<7}{:>10.4f}{:>10.4f}{:>10.4f}  {}\n", sensor_name(s.sensor), s.r, s.m,
               monotonicity_strength(s.m), s.selected ? "yes" : "no");
  fmt::print(out, "\n{:<8}{:>7}{:>15}{:>14}\n", "size", "window", "train windows", "test engines");
  const auto sizes = data.sizes.ascending();
  for (std::size_t i = 0; i < 3; ++i)
    fmt::print(out, "{:<8}{:>7}{:>15}{:>14}\n", size_name(i), sizes[i], data.train[i].size(),
               data.test[i].size());
  fmt::print(out, "{:<8}{:>7}{:>15}{:>14}\n", "total", "", "", data.test_engine_count());

  if (data.test_engine_count() != test.size())
    throw CoverageError("test windows do not cover every engine exactly once");
  manifest.set("input_hash", data.input_hash);
  manifest.set("selected_sensors", fmt::format("{}", fmt::join(data.selection.selected, ",")));
  manifest.set("archive_manifest_hash", git_blob_hash_file(archive_dir(c) / "manifest.txt"));
  manifest.complete();
  return kOk;
}

int cmd_train(const RunConfig& c, std::size_t jobs, std::ostream& out) {
  const auto data = open_archive(c);
  RunManifest manifest(c, "train");
  manifest.set("input_hash", data.input_hash);
  manifest.set("variant", c.variant);
  manifest.set("jobs", std::to_string(jobs));

  const auto spec = AblationSpec::parse(c.variant);
  std::mutex print_mutex;
  fmt::print(out, "training {} on {} ({} epochs, batch {}, {} worker(s))\n", spec.name(),
             to_string(c.sub_dataset), c.train.epochs, c.train.batch_size, jobs);
  auto runs = train_multi_window(data, model_for(c, data), spec, c.train, jobs,
                                 [&](const WindowProgress& p) {
                                   print_progress(out, print_mutex, p, c.train.epochs);
                                 });

  for (const auto& r : runs) {
    const CheckpointMetadata meta{{"sub_dataset", to_string(c.sub_dataset)},
                                  {"window", std::to_string(r.window)},
                                  {"variant", spec.name()},
                                  {"seed", std::to_string(c.seed)},
                                  {"epochs", std::to_string(c.train.epochs)},
                                  {"input_hash", data.input_hash}};
    const auto path = checkpoint_path(c, r.window);
    fs::create_directories(path.parent_path());
    save_checkpoint(r.model, path, meta);
    if (load_checkpoint(path).model.parameter_count() != r.model.parameter_count())
      throw std::runtime_error("checkpoint " + path.string() + " failed to round-trip");

    std::string curve = "epoch,loss\n";
    for (std::size_t e = 0; e < r.training.loss_curve.size(); ++e)
      curve += fmt::format("{},{:.17g}\n", e + 1, r.training.loss_curve[e]);
    write_text(c.out / fmt::format("loss_w{}.csv", r.window), curve);
    fmt::print(out, "w={}: final loss {:.4f}, {} parameters, {:.3f}s/epoch -> {}\n", r.window,
               r.training.loss_curve.back(), r.model.parameter_count(),
               r.training.mean_epoch_seconds(), path.string());
  }
  manifest.complete();
  return kOk;
}

int cmd_evaluate(const RunConfig& c, std::ostream& out) {
  const auto data = open_archive(c);
  const auto windows = data.sizes.ascending();
  std::vector<LoadedCheckpoint> loaded;
  for (std::size_t i = 0; i < windows.size(); ++i) {
    const auto path = checkpoint_path(c, windows[i]);
    if (!fs::exists(path))
      throw DataError(fmt::format("missing checkpoint for the {} window ({}): {}; run `tcftbed "
                                  "train` first",
                                  size_name(i), windows[i], path.string()));
    loaded.push_back(load_checkpoint(path));
    if (loaded.back().model.config().input_channels != data.channels())
      throw DataError(fmt::format("checkpoint {} expects {} channels, archive has {}",
                                  path.string(), loaded.back().model.config().input_channels,
                                  data.channels()));
  }
  RunManifest manifest(c, "evaluate");
  manifest.set("input_hash", data.input_hash);

  std::vector<const TcftBedModel*> models;
  for (const auto& l : loaded) models.push_back(&l.model);
  const auto eval = evaluate_models(models, data, c.score);

  const auto sub = to_string(c.sub_dataset);
  std::string metrics = std::string(kMetricsHeader) + "\n";
  for (std::size_t i = 0; i < eval.report.per_size.size(); ++i)
    metrics += metrics_row(sub, eval.report.per_size[i], models[i]->parameter_count());
  metrics += metrics_row(sub, eval.report.concatenated, models.back()->parameter_count());
  write_text(c.out / "metrics.csv", metrics);

  std::string preds = std::string(kPredictionsHeader) + "\n";
  for (const auto& s : eval.predictions)
    for (std::size_t j = 0; j < s.unit_ids.size(); ++j)
      preds += fmt::format("{},{},{:.6f},{:.6f}\n", s.unit_ids[j], s.window, s.labels[j],
                           s.predictions[j]);
  write_text(c.out / "predictions.csv", preds);

  if (count_lines(c.out / "predictions.csv") != data.test_engine_count() + 1 ||
      count_lines(c.out / "metrics.csv") != windows.size() + 2)
    throw std::runtime_error("evaluation outputs failed validation");

  fmt::print(out, "{:<8}{:>7}{:>10}{:>12}{:>10}{:>8}{:>6}\n", "size", "window", "RMSE", "score",
             "MAE", "R2", "n");
  for (std::size_t i = 0; i < eval.report.per_size.size(); ++i)
    print_group(out, size_name(i), eval.report.per_size[i]);
  print_group(out, "concat", eval.report.concatenated);
  manifest.complete();
  return kOk;
}

int cmd_ablate(const RunConfig& c, std::size_t jobs, std::ostream& out) {
  const auto data = open_archive(c);
  std::vector<AblationSpec> specs;
  for (const auto& v : c.ablation_variants()) specs.push_back(AblationSpec::parse(v));
  RunManifest manifest(c, "ablate");
  manifest.set("input_hash", data.input_hash);
  manifest.set("jobs", std::to_string(jobs));

  std::string csv = std::string(kAblationHeader) + "\n";
  std::mutex print_mutex;
  for (const auto& spec : specs) {
    fmt::print(out, "variant {}\n", spec.name());
    const auto r = run_ablation(spec, data, model_for(c, data), c.train, jobs, c.score,
                                [&](const WindowProgress& p) {
                                  print_progress(out, print_mutex, p, c.train.epochs);
                                });
    const auto& g = r.report.concatenated;
    csv += fmt::format("{},{},{:.6f},{:.6f},{:.6f},{:.6f},{},{},{:.4f}\n", r.variant,
                       to_string(c.sub_dataset), g.rmse, g.score, g.mae, g.r_squared, g.n,
                       r.parameters, r.mean_epoch_seconds);
    fmt::print(out, "  RMSE {:.3f}  score {:.3f}  params {}  {:.3f}s/epoch\n", g.rmse, g.score,
               r.parameters, r.mean_epoch_seconds);
  }
  write_text(c.out / "ablation.csv", csv);
  if (count_lines(c.out / "ablation.csv") != specs.size() + 1)
    throw std::runtime_error("ablation.csv failed validation");
  manifest.complete();
  return kOk;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"TCFT-BED remaining-useful-life pipeline"};
  app.require_subcommand(1);
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out_dir;
  std::size_t jobs = 1;
  std::vector<std::string> variants;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "JSON run configuration")->check(CLI::ExistingFile);
    sub->add_option("--seed", seed, "seed for every random draw (overrides the config)");
    sub->add_option("--out", out_dir, "run directory (overrides the config)");
    sub->add_option("--jobs", jobs, "worker threads for per-window-size work")
        ->check(CLI::PositiveNumber);
  };
  auto* prepare = app.add_subcommand("prepare", "select sensors and write the windowed dataset archive");
  auto* train = app.add_subcommand("train", "train one model per window size");
  auto* evaluate = app.add_subcommand("evaluate", "score the checkpoints on the test windows");
  auto* ablate = app.add_subcommand("ablate", "train and score each ablation variant");
  for (auto* s : {prepare, train, evaluate, ablate}) add_common(s);
  ablate->add_option("--variants", variants, "variants to run (overrides the config)")
      ->delimiter(',');

  std::vector<std::string> rev(args.rbegin(), args.rend() - 1);
  try {
    app.parse(rev);
  } catch (const CLI::ParseError& e) {
    std::ostringstream o, e2;
    const int code = app.exit(e, o, e2);
    out << o.str();
    err << e2.str();
    return code == 0 ? kOk : kConfigError;
  }

  try {
    RunConfig c = config_path.empty() ? RunConfig{} : load_run_config(config_path);
    if (seed) {
      c.seed = *seed;
      c.train.seed = *seed;
    }
    if (out_dir) c.out = *out_dir;
    if (!variants.empty()) {
      for (const auto& v : variants) AblationSpec::parse(v);
      c.variants = variants;
    }
    if (prepare->parsed()) return cmd_prepare(c, out);
    if (train->parsed()) return cmd_train(c, jobs, out);
    if (evaluate->parsed()) return cmd_evaluate(c, out);
    return cmd_ablate(c, jobs, out);
  } catch (const ConfigError& e) {
    err << "configuration error: " << e.what() << "\n";
    return kConfigError;
  } catch (const ParseError& e) {
    err << "parse error: " << e.what() << "\n";
    return kDataError;
  } catch (const CoverageError& e) {
    err << "coverage error: " << e.what() << "\n";
    return kDataError;
  } catch (const DataError& e) {
    err << "data error: " << e.what() << "\n";
    return kDataError;
  } catch (const NonFiniteError& e) {
    err << "numerical error: " << e.what() << "\n";
    return kNumericError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kFailure;
  }
}

}  // namespace tcft::cli
