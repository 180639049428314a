// Acceptance suite. `tcft_acceptance` runs every criterion; `tcft_acceptance N`
// runs one. Exit status: 0 pass, 1 fail, 77 skipped (missing data).
//
// Environment:
//   TCFT_CMAPSS_DIR          directory with train_/test_/RUL_FD00x.txt
//   TCFT_ACCEPTANCE_PROFILE  "reduced" (default) or "full" for criterion 5
//   TCFT_ACCEPTANCE_JOBS     worker threads for multi-window training

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <fmt/format.h>

#include "cli.hpp"
#include "gradcheck.hpp"
#include "synthetic_cmapss.hpp"
#include "tcft/ablation.hpp"
#include "tcft/attention.hpp"
#include "tcft/init.hpp"
#include "tcft/layers.hpp"
#include "tcft/metrics.hpp"
#include "tcft/model.hpp"
#include "tcft/ops.hpp"

namespace fs = std::filesystem;
using namespace tcft;
using tcft::testing::check_gradients;
using tcft::testing::projection_loss;
using tcft::testing::random_tensor;
using tcft::testing::randomize;

namespace {

enum class Status { pass, fail, skip };

struct Outcome {
  Status status;
  std::string detail;
};

constexpr int kSkipExit = 77;

std::optional<fs::path> cmapss_dir() {
  const char* dir = std::getenv("TCFT_CMAPSS_DIR");
  if (!dir || !*dir) return std::nullopt;
  return fs::path(dir);
}

std::size_t jobs() {
  if (const char* j = std::getenv("TCFT_ACCEPTANCE_JOBS")) return std::max(1, std::atoi(j));
  return std::max(1u, std::thread::hardware_concurrency());
}

double mean(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

// ---------------------------------------------------------------------------
// 1. Gradient fidelity

Outcome gradient_fidelity() {
  struct Row {
    std::string block;
    double error;
    double limit;
  };
  std::vector<Row> rows;
  Rng rng(101);

  {
    CausalConv1d conv(3, 4, 3, 2);
    ParameterList leaves;
    conv.collect("conv", leaves);
    randomize(leaves, rng);
    SequenceBatch x{random_tensor({2 * 9, 3}, rng), 2, 9};
    leaves.push_back({"x", x.data});
    rows.push_back({"dilated causal conv",
                    check_gradients([&] { return projection_loss(conv.forward(x).data); }, leaves)
                        .max_relative_error,
                    1e-4});
  }
  {
    Dense proj(3, 5);
    ParameterList leaves;
    proj.collect("proj", leaves);
    randomize(leaves, rng);
    SequenceBatch x{random_tensor({6, 3}, rng), 2, 3};
    SequenceBatch y{random_tensor({6, 5}, rng), 2, 3};
    leaves.push_back({"x", x.data});
    leaves.push_back({"y", y.data});
    rows.push_back({"residual connection",
                    check_gradients(
                        [&] { return projection_loss(tcn_residual(x, y, &proj).data); }, leaves)
                        .max_relative_error,
                    1e-4});
  }
  {
    LstmParams p(3, 4);
    ParameterList leaves;
    p.collect("lstm", leaves);
    randomize(leaves, rng);
    auto x = random_tensor({2, 3}, rng);
    auto h = random_tensor({2, 4}, rng);
    auto c = random_tensor({2, 4}, rng);
    leaves.push_back({"x", x});
    leaves.push_back({"h", h});
    leaves.push_back({"c", c});
    rows.push_back({"LSTM step",
                    check_gradients(
                        [&] {
                          const auto s = lstm_step(x, {h, c}, p);
                          return add(projection_loss(s.h, 5), projection_loss(s.c, 6));
                        },
                        leaves)
                        .max_relative_error,
                    1e-4});
  }
  {
    LstmParams fwd(3, 2), bwd(3, 2);
    ParameterList leaves;
    fwd.collect("fwd", leaves);
    bwd.collect("bwd", leaves);
    randomize(leaves, rng);
    SequenceBatch x{random_tensor({2 * 5, 3}, rng), 2, 5};
    leaves.push_back({"x", x.data});
    rows.push_back({"bidirectional LSTM",
                    check_gradients(
                        [&] { return projection_loss(bilstm_forward(x, fwd, bwd).data); }, leaves)
                        .max_relative_error,
                    1e-4});
  }
  {
    MultiHeadAttention mha(8, 2);
    ParameterList leaves;
    mha.collect("mha", leaves);
    randomize(leaves, rng);
    SequenceBatch x{random_tensor({2 * 5, 8}, rng), 2, 5};
    leaves.push_back({"x", x.data});
    rows.push_back({"multi-head attention",
                    check_gradients([&] { return projection_loss(mha.forward(x).data); }, leaves)
                        .max_relative_error,
                    1e-4});
  }
  {
    auto x = random_tensor({3, 6}, rng);
    auto w = random_tensor({6, 6}, rng);
    rows.push_back({"gated output",
                    check_gradients([&] { return projection_loss(gated_output(x, w)); },
                                    {{"x", x}, {"w", w}})
                        .max_relative_error,
                    1e-4});
  }
  {
    auto x = random_tensor({4, 6}, rng);
    auto gain = random_tensor({6}, rng);
    auto bias = random_tensor({6}, rng);
    rows.push_back({"layer norm",
                    check_gradients([&] { return projection_loss(layer_norm(x, gain, bias)); },
                                    {{"x", x}, {"gain", gain}, {"bias", bias}})
                        .max_relative_error,
                    1e-4});
  }
  {
    ModelConfig c;
    c.input_channels = 2;
    c.tcn_filters = 4;
    c.encoder_hidden = 4;
    c.decoder_hidden = 4;
    c.attention_heads = 2;
    c.fc_hidden = 4;
    TcftBedModel model(c);
    xavier_uniform_init(model, rng);
    randomize(model.parameters(), rng, 0.5);
    SequenceBatch x{random_tensor({2 * 19, 2}, rng, 1.0, false), 2, 19};
    rows.push_back({"full model (reduced width)",
                    check_gradients([&] { return sum(model.forward(x)); }, model.parameters())
                        .max_relative_error,
                    1e-3});
  }

  bool ok = true;
  std::string detail;
  for (const auto& r : rows) {
    ok &= r.error < r.limit;
    detail += fmt::format("{}{} {:.1e}/{:.0e}", detail.empty() ? "" : "; ", r.block, r.error,
                          r.limit);
  }
  return {ok ? Status::pass : Status::fail, detail};
}

// ---------------------------------------------------------------------------
// 2. Causality and receptive field

Outcome causality() {
  constexpr std::size_t T = 96, C = 3, F = 5;
  const std::vector<std::size_t> dilations{1, 2, 4, 8, 16};
  Rng rng(202);

  // Leakage: with signed random weights, perturbing step s must leave every
  // earlier output of every layer untouched.
  TcnBlock tcn(C, F, 3, dilations);
  ParameterList params;
  tcn.collect("tcn", params);
  randomize(params, rng, 0.8);
  SequenceBatch x{random_tensor({T, C}, rng, 1.0, false), 1, T};
  const auto base = tcn.forward_layers(x);
  std::size_t leaks = 0;
  for (std::size_t s : {0ul, 17ul, 48ul, 95ul}) {
    auto xv = x.data.values();
    std::vector<double> moved(xv.begin(), xv.end());
    for (std::size_t c = 0; c < C; ++c) moved[s * C + c] += 3.0;
    const auto out = tcn.forward_layers({Tensor::from({T, C}, moved), 1, T});
    for (std::size_t l = 0; l < out.size(); ++l) {
      const auto a = base[l].data.values();
      const auto b = out[l].data.values();
      for (std::size_t t = 0; t < s; ++t)
        for (std::size_t f = 0; f < F; ++f) leaks += a[t * F + f] != b[t * F + f];
    }
  }

  // Footprint: with positive weights and inputs every ReLU is active, so the
  // set of outputs an impulse reaches is exactly the receptive field.
  TcnBlock positive(C, F, 3, dilations);
  ParameterList pos_params;
  positive.collect("tcn", pos_params);
  for (auto& p : pos_params) {
    Tensor t = p.tensor;
    for (auto& v : t.mutable_values()) v = rng.uniform(0.05, 0.3);
  }
  std::vector<double> ones(T * C, 1.0);
  const auto ref = positive.forward({Tensor::from({T, C}, ones), 1, T}).data;
  const std::size_t s = 10;
  for (std::size_t c = 0; c < C; ++c) ones[s * C + c] += 1.0;
  const auto hit = positive.forward({Tensor::from({T, C}, ones), 1, T}).data;
  std::size_t first = T, last = 0, reached = 0;
  for (std::size_t t = 0; t < T; ++t) {
    bool changed = false;
    for (std::size_t f = 0; f < F; ++f) changed |= ref.at(t * F + f) != hit.at(t * F + f);
    if (changed) {
      first = std::min(first, t);
      last = std::max(last, t);
      ++reached;
    }
  }
  const std::size_t measured = reached == 0 ? 0 : last - s + 1;
  const bool contiguous = reached == last - first + 1 && first == s;
  const bool ok = leaks == 0 && contiguous && measured == 63 && tcn.receptive_field() == 63;
  return {ok ? Status::pass : Status::fail,
          fmt::format("future-leak changes {}, probed receptive field {}, analytic {}", leaks,
                      measured, tcn.receptive_field())};
}

// ---------------------------------------------------------------------------
// 3. Data protocol

// Brute-force counters that do not reuse the library's counting code.
std::size_t count_train_windows(std::span<const EngineTrajectory> engines, std::size_t w) {
  std::size_t n = 0;
  for (const auto& e : engines)
    for (std::size_t end = 1; end <= e.length(); ++end) n += end >= w;
  return n;
}

std::string protocol_violations(const std::string& name, std::span<const EngineTrajectory> train,
                                std::span<const EngineTrajectory> test,
                                std::span<const double> rul, const PreparedDataset& data) {
  std::vector<std::string> issues;
  const auto sizes = data.sizes.ascending();
  std::map<int, std::size_t> lengths;
  for (const auto& e : train) lengths[e.unit_id] = e.length();
  for (std::size_t i = 0; i < 3; ++i) {
    const auto expected = count_train_windows(train, sizes[i]);
    if (data.train[i].size() != expected)
      issues.push_back(fmt::format("w={} has {} train windows, brute force {}", sizes[i],
                                   data.train[i].size(), expected));
    for (const auto& s : data.train[i].samples) {
      const double label = std::min(125.0, double(lengths[s.unit_id]) - s.end_cycle);
      if (s.label != label || s.label < 0 || s.label > 125) {
        issues.push_back(fmt::format("train label {} for unit {} cycle {}", s.label, s.unit_id,
                                     s.end_cycle));
        break;
      }
    }
  }
  std::map<int, int> covered;
  std::map<int, double> truth;
  for (std::size_t k = 0; k < test.size(); ++k) truth[test[k].unit_id] = rul[k];
  for (const auto& ds : data.test)
    for (const auto& s : ds.samples) {
      ++covered[s.unit_id];
      if (s.label != std::min(125.0, truth[s.unit_id]) || s.label < 0 || s.label > 125)
        issues.push_back(fmt::format("test label {} for unit {}", s.label, s.unit_id));
    }
  std::size_t once = 0;
  for (const auto& e : test) once += covered[e.unit_id] == 1;
  if (once != test.size() || covered.size() != test.size())
    issues.push_back(fmt::format("{} of {} test engines covered exactly once", once, test.size()));
  if (issues.empty()) return "";
  return name + ": " + issues.front() + (issues.size() > 1 ? fmt::format(" (+{} more)", issues.size() - 1) : "");
}

Outcome data_protocol() {
  testing::SyntheticSpec spec;
  spec.train_units = 12;
  spec.test_units = 15;
  const auto synth = testing::make_synthetic_cmapss(spec);
  const WindowSizes synth_sizes{31, 60, 125};
  const auto prepared =
      prepare_dataset(SubDataset::FD001, synth.train, synth.test, synth.rul, synth_sizes, 0.5, 0.5);
  if (auto v = protocol_violations("synthetic", synth.train, synth.test, synth.rul, prepared);
      !v.empty())
    return {Status::fail, v};

  const auto dir = cmapss_dir();
  if (!dir)
    return {Status::skip,
            "synthetic window/label/coverage oracles pass; trajectory counts need TCFT_CMAPSS_DIR"};

  std::string detail;
  for (auto sub : {SubDataset::FD001, SubDataset::FD002, SubDataset::FD003, SubDataset::FD004}) {
    const auto files = cmapss_files(*dir, sub);
    const auto train = load_cmapss(files.train);
    const auto test = load_cmapss(files.test);
    const auto rul = load_rul(files.rul);
    const auto expected = expected_trajectory_counts(sub);
    if (train.size() != expected.train || test.size() != expected.test || rul.size() != test.size())
      return {Status::fail, fmt::format("{}: {}/{} trajectories, expected {}/{}", to_string(sub),
                                        train.size(), test.size(), expected.train, expected.test)};
    const auto data =
        prepare_dataset(sub, train, test, rul, default_window_sizes(sub), 0.5, 0.5);
    if (auto v = protocol_violations(to_string(sub), train, test, rul, data); !v.empty())
      return {Status::fail, v};
    detail += fmt::format("{}{} {}/{}", detail.empty() ? "" : ", ", to_string(sub), train.size(),
                          test.size());
  }
  return {Status::pass, "trajectory counts " + detail + "; windows, labels and coverage match"};
}

// ---------------------------------------------------------------------------
// 4. Metrics

Outcome metric_correctness() {
  std::vector<std::string> issues;
  auto expect = [&](bool ok, const std::string& what) {
    if (!ok) issues.push_back(what);
  };
  const double late = score_term(13.0), early = score_term(-13.0);
  expect(std::abs(late) > std::abs(early), "|s(+13)| > |s(-13)|");
  expect(std::abs(late - (std::exp(1.3) - 1.0)) < 1e-12, "s(+13) = e^1.3 - 1");
  expect(std::abs(early - (std::exp(1.0) - 1.0)) < 1e-12, "s(-13) = e - 1");
  expect(score_term(0.0) == 0.0, "s(0) = 0");

  const std::vector<double> zero{0.0, 0.0}, res{3.0, -4.0};
  expect(std::abs(rmse(res, zero) - std::sqrt(12.5)) < 1e-12, "rmse([3,-4]) = sqrt(12.5)");
  expect(rmse(res, res) == 0.0, "rmse of identical vectors");

  // Pooling: the concatenated RMSE equals the count-weighted quadratic mean
  // of the per-size RMSEs, and the score is additive.
  Rng rng(404);
  std::vector<SizePredictions> sizes;
  std::vector<int> units;
  int unit = 1;
  for (std::size_t w : {31, 60, 125}) {
    SizePredictions s;
    s.window = w;
    const std::size_t n = 3 + rng.below(9);
    for (std::size_t i = 0; i < n; ++i) {
      s.unit_ids.push_back(unit);
      units.push_back(unit++);
      s.labels.push_back(rng.uniform(0.0, 125.0));
      s.predictions.push_back(s.labels.back() + rng.uniform(-30.0, 30.0));
    }
    sizes.push_back(std::move(s));
  }
  const auto report = evaluate_multi_window(sizes, units);
  double sq = 0.0, score = 0.0;
  std::size_t n = 0;
  for (const auto& g : report.per_size) {
    sq += g.rmse * g.rmse * static_cast<double>(g.n);
    score += g.score;
    n += g.n;
  }
  const auto& all = report.concatenated;
  expect(all.n == n && all.n == units.size(), "pooled count");
  expect(std::abs(all.rmse - std::sqrt(sq / static_cast<double>(n))) < 1e-9, "pooled RMSE");
  expect(std::abs(all.score - score) < 1e-9 * std::max(1.0, score), "pooled score");

  if (!issues.empty()) return {Status::fail, "failed: " + issues.front()};
  return {Status::pass, fmt::format("s(+13)={:.4f} s(-13)={:.4f} s(0)=0; pooled RMSE {:.4f} over {} "
                                    "engines matches the per-size identity",
                                    late, early, all.rmse, all.n)};
}

// ---------------------------------------------------------------------------
// 5 and 6. Training runs on the real benchmark

struct Profile {
  std::string name;
  ModelConfig model;
  TrainConfig train;
};

Profile profile(const std::string& name) {
  Profile p;
  p.name = name;
  if (name == "full") return p;
  p.name = "reduced";
  p.model.tcn_filters /= 2;
  p.model.encoder_hidden /= 2;
  p.model.decoder_hidden /= 2;
  p.model.fc_hidden /= 2;
  p.train.epochs = 30;
  return p;
}

PreparedDataset load_benchmark(const fs::path& dir, SubDataset sub) {
  const auto files = cmapss_files(dir, sub);
  const auto test = load_cmapss(files.test);
  return prepare_dataset(sub, load_cmapss(files.train), test, load_rul(files.rul),
                         default_window_sizes(sub), 0.5, 0.5);
}

MetricsReport train_and_score(const PreparedDataset& data, const Profile& p,
                              const AblationSpec& spec, std::uint64_t seed) {
  ModelConfig model = p.model;
  model.input_channels = data.channels();
  TrainConfig train = p.train;
  train.seed = seed;
  return run_ablation(spec, data, model, train, jobs()).report;
}

Outcome fd001_accuracy() {
  const auto dir = cmapss_dir();
  if (!dir) return {Status::skip, "needs TCFT_CMAPSS_DIR with the FD001 files"};
  const char* env = std::getenv("TCFT_ACCEPTANCE_PROFILE");
  const auto p = profile(env ? env : "reduced");
  const double limit = p.name == "full" ? 14.4 : 20.0;
  const auto data = load_benchmark(*dir, SubDataset::FD001);

  std::vector<double> concat, medium, large;
  for (std::uint64_t seed : {0, 1, 2}) {
    const auto r = train_and_score(data, p, AblationSpec{}, seed);
    concat.push_back(r.concatenated.rmse);
    medium.push_back(r.per_size[1].rmse);
    large.push_back(r.per_size[2].rmse);
    std::cout << fmt::format("  seed {}: small {:.2f} medium {:.2f} large {:.2f} concat {:.2f}\n",
                             seed, r.per_size[0].rmse, medium.back(), large.back(), concat.back());
  }
  const bool ok = mean(concat) <= limit && mean(large) < mean(medium);
  return {ok ? Status::pass : Status::fail,
          fmt::format("{} profile, 3 seeds: concat RMSE {:.2f} (limit {:.1f}), large {:.2f} vs "
                      "medium {:.2f}",
                      p.name, mean(concat), limit, mean(large), mean(medium))};
}

Outcome ablation_direction() {
  const auto dir = cmapss_dir();
  if (!dir) return {Status::skip, "needs TCFT_CMAPSS_DIR with the FD003 files"};
  const auto p = profile("reduced");
  const auto data = load_benchmark(*dir, SubDataset::FD003);
  int tcn_wins = 0, attention_wins = 0;
  std::string detail;
  for (std::uint64_t seed : {0, 1, 2}) {
    const double full = train_and_score(data, p, AblationSpec{}, seed).concatenated.rmse;
    const double no_tcn =
        train_and_score(data, p, AblationSpec::parse("no_tcn"), seed).concatenated.rmse;
    const double ff =
        train_and_score(data, p, AblationSpec::parse("attention_replaced_ff"), seed)
            .concatenated.rmse;
    tcn_wins += no_tcn >= full;
    attention_wins += ff >= full;
    detail += fmt::format("{}seed {}: full {:.2f} no_tcn {:.2f} ff {:.2f}",
                          detail.empty() ? "" : "; ", seed, full, no_tcn, ff);
  }
  const bool ok = tcn_wins >= 2 && attention_wins >= 2;
  return {ok ? Status::pass : Status::fail, detail};
}

// ---------------------------------------------------------------------------
// 7. Structural parity

Outcome structural_parity() {
  ModelConfig base;
  base.input_channels = 14;
  auto count = [&](const char* name) {
    return TcftBedModel(variant_config(base, AblationSpec::parse(name), 125)).parameter_count();
  };
  const std::size_t full = count("full"), tcn = count("pure_tcn_baseline"),
                    modified = count("modified_tft_only"), original = count("original_tft_baseline");
  const double reference = 81153.0 / 52225.0;
  const double ratio = static_cast<double>(full) / static_cast<double>(modified);
  const bool ok = full > tcn && full > modified && ratio >= 0.8 * reference &&
                  ratio <= 1.2 * reference;
  return {ok ? Status::pass : Status::fail,
          fmt::format("full {} > pure TCN {}; full/modified-TFT {}/{} = {:.3f} vs reference "
                      "{:.3f} (band {:.3f}..{:.3f}); original TFT {} (not asserted)",
                      full, tcn, full, modified, ratio, reference, 0.8 * reference, 1.2 * reference, original)};
}

// ---------------------------------------------------------------------------
// 8. Determinism

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::ostringstream s;
  s << f.rdbuf();
  return s.str();
}

Outcome determinism() {
  const fs::path root = fs::temp_directory_path() / "tcft_acceptance_determinism";
  fs::remove_all(root);
  fs::create_directories(root / "data");
  testing::SyntheticSpec spec;
  spec.train_units = 8;
  spec.test_units = 8;
  testing::write_synthetic_files(root / "data", "FD001", testing::make_synthetic_cmapss(spec));
  std::ofstream(root / "run.json") << R"({
    "data_dir": "data",
    "window_sizes": {"small": 15, "medium": 25, "large": 40},
    "train": {"epochs": 3, "batch_size": 32},
    "model": {"tcn_filters": 8, "encoder_hidden": 4, "decoder_hidden": 4,
              "attention_heads": 2, "fc_hidden": 8},
    "seed": 11
  })";

  std::vector<std::string> csvs;
  for (const char* run : {"first", "second"}) {
    const std::string out = (root / run).string();
    const std::string config = (root / "run.json").string();
    for (const char* cmd : {"prepare", "train", "evaluate"}) {
      std::ostringstream sink, err;
      const int code =
          cli::run({"tcftbed", cmd, "--config", config, "--out", out}, sink, err);
      if (code != 0) {
        fs::remove_all(root);
        return {Status::fail, fmt::format("{} run, {} exited {}: {}", run, cmd, code, err.str())};
      }
    }
    csvs.push_back(slurp(fs::path(out) / "metrics.csv"));
  }
  fs::remove_all(root);
  const bool ok = !csvs[0].empty() && csvs[0] == csvs[1];
  return {ok ? Status::pass : Status::fail,
          fmt::format("two prepare/train/evaluate runs: metrics.csv {} ({} bytes)",
                      ok ? "byte-identical" : "differs", csvs[0].size())};
}

const std::vector<std::pair<std::string, std::function<Outcome()>>>& criteria() {
  static const std::vector<std::pair<std::string, std::function<Outcome()>>> all{
      {"gradient fidelity", gradient_fidelity},
      {"causality and receptive field", causality},
      {"data protocol", data_protocol},
      {"metric correctness", metric_correctness},
      {"FD001 accuracy", fd001_accuracy},
      {"FD003 ablation directionality", ablation_direction},
      {"structural parity", structural_parity},
      {"determinism", determinism},
  };
  return all;
}

Status run_one(std::size_t index) {
  const auto& [name, fn] = criteria()[index];
  const auto start = std::chrono::steady_clock::now();
  Outcome o;
  try {
    o = fn();
  } catch (const std::exception& e) {
    o = {Status::fail, std::string("exception: ") + e.what()};
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  const char* label = o.status == Status::pass ? "PASS" : o.status == Status::fail ? "FAIL" : "SKIP";
  std::cout << fmt::format("criterion {}: {} {} [{:.1f}s] {}\n", index + 1, label, name, secs,
                           o.detail)
            << std::flush;
  return o.status;
}

}  // namespace

int main(int argc, char** argv) {
  if (argc > 1) {
    const int n = std::atoi(argv[1]);
    if (n < 1 || n > static_cast<int>(criteria().size())) {
      std::cerr << "usage: tcft_acceptance [1-" << criteria().size() << "]\n";
      return 2;
    }
    const auto s = run_one(static_cast<std::size_t>(n - 1));
    return s == Status::pass ? 0 : s == Status::skip ? kSkipExit : 1;
  }
  bool failed = false;
  for (std::size_t i = 0; i < criteria().size(); ++i) failed |= run_one(i) == Status::fail;
  return failed ? 1 : 0;
}
