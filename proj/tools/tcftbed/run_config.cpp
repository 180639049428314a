#include "run_config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <fmt/format.h>
#include <json.hpp>

#include "tcft/ablation.hpp"
#include "tcft/errors.hpp"

namespace tcft::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

void reject_unknown(const json& j, const std::set<std::string>& allowed, const std::string& where) {
  if (!j.is_object()) throw ConfigError(fmt::format("{} must be a JSON object", where));
  for (const auto& [key, value] : j.items()) {
    if (!allowed.contains(key)) {
      throw ConfigError(fmt::format("unknown key '{}' in {} (allowed: {})", key, where,
                                    fmt::join(allowed, ", ")));
    }
  }
}

template <class T>
void read(const json& j, const char* key, T& target, const std::string& where) {
  if (!j.contains(key)) return;
  try {
    target = j.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError(fmt::format("{}.{} has the wrong type", where, key));
  }
}

fs::path existing(const json& j, const char* key, const fs::path& base) {
  std::string raw;
  read(j, key, raw, "config");
  fs::path p(raw);
  if (p.is_relative() && !base.empty()) p = base / p;
  if (!fs::exists(p)) throw ConfigError(fmt::format("{} '{}' does not exist", key, p.string()));
  return p;
}

}  // namespace

WindowSizes RunConfig::sizes() const {
  return window_sizes ? *window_sizes : default_window_sizes(sub_dataset);
}

CmapssFiles RunConfig::data_files() const {
  if (train_file && test_file && rul_file) return {*train_file, *test_file, *rul_file};
  if (data_dir) return cmapss_files(*data_dir, sub_dataset);
  throw ConfigError("no input data configured: set data_dir, or train_file, test_file and rul_file");
}

std::vector<std::string> RunConfig::ablation_variants() const {
  return variants.empty() ? std::vector<std::string>{variant} : variants;
}

std::string RunConfig::to_json() const {
  json j;
  j["sub_dataset"] = to_string(sub_dataset);
  if (data_dir) j["data_dir"] = data_dir->string();
  if (train_file) j["train_file"] = train_file->string();
  if (test_file) j["test_file"] = test_file->string();
  if (rul_file) j["rul_file"] = rul_file->string();
  const auto s = sizes();
  j["window_sizes"] = {{"small", s.small}, {"medium", s.medium}, {"large", s.large}};
  j["tau_c"] = tau_c;
  j["tau_m"] = tau_m;
  j["train"] = {{"learning_rate", train.learning_rate}, {"weight_decay", train.weight_decay},
                {"epochs", train.epochs},               {"batch_size", train.batch_size},
                {"dropout", train.dropout},             {"beta1", train.beta1},
                {"beta2", train.beta2},                 {"epsilon", train.epsilon}};
  j["model"] = {{"tcn_filters", model.tcn_filters},       {"kernel_size", model.kernel_size},
                {"dilations", model.dilations},           {"encoder_hidden", model.encoder_hidden},
                {"decoder_hidden", model.decoder_hidden}, {"attention_heads", model.attention_heads},
                {"fc_hidden", model.fc_hidden}};
  j["variant"] = variant;
  j["variants"] = ablation_variants();
  j["score_convention"] = to_string(score);
  j["out"] = out.string();
  j["seed"] = seed;
  return j.dump();
}

RunConfig parse_run_config(const std::string& text, const fs::path& base) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  reject_unknown(j,
                 {"sub_dataset", "data_dir", "train_file", "test_file", "rul_file", "window_sizes",
                  "tau_c", "tau_m", "train", "model", "variant", "variants", "score_convention",
                  "out", "seed"},
                 "config");
  RunConfig c;
  if (j.contains("sub_dataset")) {
    std::string name;
    read(j, "sub_dataset", name, "config");
    c.sub_dataset = parse_sub_dataset(name);
  }
  if (j.contains("data_dir")) c.data_dir = existing(j, "data_dir", base);
  if (j.contains("train_file")) c.train_file = existing(j, "train_file", base);
  if (j.contains("test_file")) c.test_file = existing(j, "test_file", base);
  if (j.contains("rul_file")) c.rul_file = existing(j, "rul_file", base);
  if (j.contains("window_sizes")) {
    const auto& w = j.at("window_sizes");
    reject_unknown(w, {"small", "medium", "large"}, "window_sizes");
    WindowSizes s = default_window_sizes(c.sub_dataset);
    read(w, "small", s.small, "window_sizes");
    read(w, "medium", s.medium, "window_sizes");
    read(w, "large", s.large, "window_sizes");
    s.validate();
    c.window_sizes = s;
  }
  read(j, "tau_c", c.tau_c, "config");
  read(j, "tau_m", c.tau_m, "config");
  if (!(c.tau_c >= 0.0 && c.tau_c < 1.0) || !(c.tau_m >= 0.0 && c.tau_m < 1.0))
    throw ConfigError("tau_c and tau_m must lie in [0, 1)");
  if (j.contains("train")) {
    const auto& t = j.at("train");
    reject_unknown(t, {"learning_rate", "weight_decay", "epochs", "batch_size", "dropout", "beta1",
                       "beta2", "epsilon"},
                   "train");
    read(t, "learning_rate", c.train.learning_rate, "train");
    read(t, "weight_decay", c.train.weight_decay, "train");
    read(t, "epochs", c.train.epochs, "train");
    read(t, "batch_size", c.train.batch_size, "train");
    read(t, "dropout", c.train.dropout, "train");
    read(t, "beta1", c.train.beta1, "train");
    read(t, "beta2", c.train.beta2, "train");
    read(t, "epsilon", c.train.epsilon, "train");
  }
  c.train.validate();
  if (j.contains("model")) {
    const auto& m = j.at("model");
    reject_unknown(m, {"tcn_filters", "kernel_size", "dilations", "encoder_hidden",
                       "decoder_hidden", "attention_heads", "fc_hidden"},
                   "model");
    read(m, "tcn_filters", c.model.tcn_filters, "model");
    read(m, "kernel_size", c.model.kernel_size, "model");
    read(m, "dilations", c.model.dilations, "model");
    read(m, "encoder_hidden", c.model.encoder_hidden, "model");
    read(m, "decoder_hidden", c.model.decoder_hidden, "model");
    read(m, "attention_heads", c.model.attention_heads, "model");
    read(m, "fc_hidden", c.model.fc_hidden, "model");
  }
  c.model.dropout = c.train.dropout;
  c.model.validate();
  read(j, "variant", c.variant, "config");
  read(j, "variants", c.variants, "config");
  for (const auto& v : c.ablation_variants()) AblationSpec::parse(v);
  if (j.contains("score_convention")) {
    std::string s;
    read(j, "score_convention", s, "config");
    c.score = parse_score_convention(s);
  }
  if (j.contains("out")) {
    std::string o;
    read(j, "out", o, "config");
    c.out = fs::path(o);
    if (c.out.is_relative() && !base.empty()) c.out = base / c.out;
  }
  read(j, "seed", c.seed, "config");
  c.train.seed = c.seed;
  return c;
}

RunConfig load_run_config(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(fmt::format("config file '{}' does not exist", path.string()));
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_run_config(ss.str(), path.parent_path());
}

}  // namespace tcft::cli
