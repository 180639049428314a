#include "tcft/model.hpp"

#include <json.hpp>

#include "tcft/errors.hpp"
#include "tcft/ops.hpp"

namespace tcft {

using nlohmann::json;

void ModelConfig::validate() const {
  if (input_channels == 0) throw ConfigError("model needs at least one input channel");
  if (!use_tcn && !use_sequence_stack) {
    throw ConfigError("invalid ablation combination: both the TCN and the sequence stack are off");
  }
  if (use_tcn) {
    if (tcn_filters == 0) throw ConfigError("TCN filter count must be positive");
    if (kernel_size == 0) throw ConfigError("kernel size must be at least 1");
    if (dilations.empty()) throw ConfigError("TCN needs at least one dilation");
    for (auto d : dilations)
      if (d == 0) throw ConfigError("dilations must be at least 1");
  }
  if (use_sequence_stack) {
    if (encoder_hidden == 0 || decoder_hidden == 0) throw ConfigError("LSTM widths must be positive");
    if (mixer == MixerKind::gated_attention &&
        (attention_heads == 0 || encoder_width() % attention_heads != 0)) {
      throw ConfigError("attention width " + std::to_string(encoder_width()) +
                        " is not divisible by " + std::to_string(attention_heads) + " heads");
    }
  } else if (static_enrichment) {
    throw ConfigError("invalid ablation combination: static enrichment needs the sequence stack");
  }
  if (fc_hidden == 0) throw ConfigError("fc1 width must be positive");
  if (!(dropout >= 0.0 && dropout < 1.0)) throw ConfigError("dropout must lie in [0, 1)");
}

std::size_t ModelConfig::encoder_width() const {
  return encoder == RecurrentKind::bidirectional ? 2 * encoder_hidden : encoder_hidden;
}

std::size_t ModelConfig::decoder_width() const {
  return decoder == RecurrentKind::bidirectional ? 2 * decoder_hidden : decoder_hidden;
}

namespace {

const char* name(RecurrentKind k) {
  return k == RecurrentKind::bidirectional ? "bidirectional" : "unidirectional";
}
const char* name(MixerKind k) {
  return k == MixerKind::gated_attention ? "gated_attention" : "feed_forward";
}

RecurrentKind recurrent_from(const std::string& s) {
  if (s == "bidirectional") return RecurrentKind::bidirectional;
  if (s == "unidirectional") return RecurrentKind::unidirectional;
  throw ConfigError("unknown recurrent kind '" + s + "'");
}

MixerKind mixer_from(const std::string& s) {
  if (s == "gated_attention") return MixerKind::gated_attention;
  if (s == "feed_forward") return MixerKind::feed_forward;
  throw ConfigError("unknown mixer kind '" + s + "'");
}

}  // namespace

std::string to_json(const ModelConfig& c) {
  json j;
  j["input_channels"] = c.input_channels;
  j["use_tcn"] = c.use_tcn;
  j["tcn_filters"] = c.tcn_filters;
  j["kernel_size"] = c.kernel_size;
  j["dilations"] = c.dilations;
  j["use_sequence_stack"] = c.use_sequence_stack;
  j["encoder"] = name(c.encoder);
  j["decoder"] = name(c.decoder);
  j["encoder_hidden"] = c.encoder_hidden;
  j["decoder_hidden"] = c.decoder_hidden;
  j["attention_heads"] = c.attention_heads;
  j["mixer"] = name(c.mixer);
  j["static_enrichment"] = c.static_enrichment;
  j["fc_hidden"] = c.fc_hidden;
  j["dropout"] = c.dropout;
  return j.dump();
}

ModelConfig model_config_from_json(std::string_view text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("model config is not valid JSON: ") + e.what());
  }
  ModelConfig c;
  try {
    c.input_channels = j.at("input_channels").get<std::size_t>();
    c.use_tcn = j.at("use_tcn").get<bool>();
    c.tcn_filters = j.at("tcn_filters").get<std::size_t>();
    c.kernel_size = j.at("kernel_size").get<std::size_t>();
    c.dilations = j.at("dilations").get<std::vector<std::size_t>>();
    c.use_sequence_stack = j.at("use_sequence_stack").get<bool>();
    c.encoder = recurrent_from(j.at("encoder").get<std::string>());
    c.decoder = recurrent_from(j.at("decoder").get<std::string>());
    c.encoder_hidden = j.at("encoder_hidden").get<std::size_t>();
    c.decoder_hidden = j.at("decoder_hidden").get<std::size_t>();
    c.attention_heads = j.at("attention_heads").get<std::size_t>();
    c.mixer = mixer_from(j.at("mixer").get<std::string>());
    c.static_enrichment = j.at("static_enrichment").get<bool>();
    c.fc_hidden = j.at("fc_hidden").get<std::size_t>();
    c.dropout = j.at("dropout").get<double>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("model config: ") + e.what());
  }
  c.validate();
  return c;
}

// ---------------------------------------------------------------------------

TcftBedModel::TcftBedModel(ModelConfig config) : config_(std::move(config)) {
  config_.validate();
  const auto& c = config_;
  std::size_t width = c.input_channels;
  if (c.use_tcn) {
    tcn.emplace(c.input_channels, c.tcn_filters, c.kernel_size, c.dilations);
    width = c.tcn_filters;
  }
  std::size_t head_in = width;
  if (c.use_sequence_stack) {
    encoder_fwd = LstmParams(width, c.encoder_hidden);
    if (c.encoder == RecurrentKind::bidirectional) encoder_bwd.emplace(width, c.encoder_hidden);
    const std::size_t d = c.encoder_width();
    if (c.static_enrichment) enrichment.emplace(c.input_channels, d);
    if (c.mixer == MixerKind::gated_attention) {
      attention_block.emplace(d, c.attention_heads, c.dropout);
    } else {
      mixer.emplace(d);
    }
    decoder_fwd = LstmParams(d, c.decoder_hidden);
    if (c.decoder == RecurrentKind::bidirectional) decoder_bwd.emplace(d, c.decoder_hidden);
    head_in = c.decoder_width();
  }
  fc1 = Dense(head_in, c.fc_hidden);
  fc2 = Dense(c.fc_hidden, 1);

  if (tcn) tcn->collect("tcn", params_);
  if (c.use_sequence_stack) {
    encoder_fwd.collect("encoder.fwd", params_);
    if (encoder_bwd) encoder_bwd->collect("encoder.bwd", params_);
    if (enrichment) enrichment->collect("enrichment", params_);
    if (attention_block) attention_block->collect("attention", params_);
    if (mixer) mixer->collect("mixer", params_);
    decoder_fwd.collect("decoder.fwd", params_);
    if (decoder_bwd) decoder_bwd->collect("decoder.bwd", params_);
  }
  fc1.collect("fc1", params_);
  fc2.collect("fc2", params_);
}

Tensor TcftBedModel::forward(const SequenceBatch& x, const ForwardMode& mode) const {
  if (x.features() != config_.input_channels) {
    throw DimensionError("model expects " + std::to_string(config_.input_channels) +
                         " channels, got " + std::to_string(x.features()));
  }
  if (x.steps == 0 || x.batch == 0) throw ContractError("empty input batch");
  SequenceBatch h = x;
  if (tcn) h = tcn->forward(h);
  if (config_.use_sequence_stack) {
    SequenceBatch enc = encoder_bwd ? bilstm_forward(h, encoder_fwd, *encoder_bwd)
                                    : lstm_sequence(h, encoder_fwd);
    if (enrichment) enc = enrichment->forward(enc, x);
    const SequenceBatch mixed =
        attention_block ? attention_block->forward(enc, mode) : mixer->forward(enc);
    h = decoder_bwd ? bilstm_forward(mixed, decoder_fwd, *decoder_bwd)
                    : lstm_sequence(mixed, decoder_fwd);
  }
  const Tensor last = gather_rows(h.data, last_step_rows(h.batch, h.steps));
  const Tensor z = dropout(relu(fc1.forward(last)), config_.dropout, mode.training, mode.rng);
  return fc2.forward(z);
}

void TcftBedModel::zero_grad() {
  for (auto& p : params_) p.tensor.zero_grad();
}

TcftBedModel TcftBedModel::clone() const {
  TcftBedModel copy(config_);
  for (std::size_t i = 0; i < params_.size(); ++i) {
    auto dst = copy.params_[i].tensor.mutable_values();
    const auto src = params_[i].tensor.values();
    std::copy(src.begin(), src.end(), dst.begin());
  }
  return copy;
}

Tensor tcft_bed_forward(const Tensor& x, const TcftBedModel& model, bool training, Rng* rng) {
  if (x.dim() != 2) throw DimensionError("expected a [channels x T] window");
  const SequenceBatch seq{transpose(x), 1, x.cols()};
  return reshape(model.forward(seq, ForwardMode{training, rng}), {1});
}

SequenceBatch pack_windows(std::span<const std::span<const double>> windows,
                           std::size_t channels, std::size_t steps) {
  const std::size_t B = windows.size();
  std::vector<double> data(B * steps * channels);
  for (std::size_t b = 0; b < B; ++b) {
    const auto w = windows[b];
    if (w.size() != channels * steps) {
      throw DimensionError("window holds " + std::to_string(w.size()) + " values, expected " +
                           std::to_string(channels * steps));
    }
    for (std::size_t c = 0; c < channels; ++c)
      for (std::size_t t = 0; t < steps; ++t)
        data[(b * steps + t) * channels + c] = w[c * steps + t];
  }
  return {Tensor::from({B * steps, channels}, std::move(data)), B, steps};
}

}  // namespace tcft
