#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "tcft/attention.hpp"
#include "tcft/layers.hpp"

namespace tcft {

enum class RecurrentKind { bidirectional, unidirectional };
enum class MixerKind { gated_attention, feed_forward };

// Architecture of one TCFT-BED instance, including the switches used by the
// ablation variants. Defaults are the full model at 64-unit width.
struct ModelConfig {
  std::size_t input_channels = 14;

  bool use_tcn = true;
  std::size_t tcn_filters = 64;
  std::size_t kernel_size = 3;
  std::vector<std::size_t> dilations{1, 2, 4, 8, 16};

  // false drops encoder, mixer and decoder: the TCN feeds the dense head.
  bool use_sequence_stack = true;
  RecurrentKind encoder = RecurrentKind::bidirectional;
  RecurrentKind decoder = RecurrentKind::bidirectional;
  std::size_t encoder_hidden = 64;
  std::size_t decoder_hidden = 64;
  std::size_t attention_heads = 8;
  MixerKind mixer = MixerKind::gated_attention;
  bool static_enrichment = false;

  std::size_t fc_hidden = 64;
  double dropout = 0.2;

  // Throws ConfigError for inconsistent settings.
  void validate() const;
  std::size_t encoder_width() const;
  std::size_t decoder_width() const;

  bool operator==(const ModelConfig&) const = default;
};

std::string to_json(const ModelConfig& config);
ModelConfig model_config_from_json(std::string_view text);

class TcftBedModel {
 public:
  explicit TcftBedModel(ModelConfig config);
  TcftBedModel(TcftBedModel&&) = default;
  TcftBedModel& operator=(TcftBedModel&&) = default;
  TcftBedModel(const TcftBedModel&) = delete;
  TcftBedModel& operator=(const TcftBedModel&) = delete;

  // x holds `batch` windows of `steps` timesteps and input_channels features.
  // Returns predictions as [batch x 1].
  Tensor forward(const SequenceBatch& x, const ForwardMode& mode = {}) const;

  const ModelConfig& config() const { return config_; }
  const ParameterList& parameters() const { return params_; }
  std::size_t parameter_count() const { return tcft::parameter_count(params_); }
  void zero_grad();
  TcftBedModel clone() const;

  // Null when the variant has no attention block.
  const MultiHeadAttention* attention() const {
    return attention_block ? &attention_block->attention : nullptr;
  }

  std::optional<TcnBlock> tcn;
  LstmParams encoder_fwd;
  std::optional<LstmParams> encoder_bwd;
  std::optional<StaticEnrichment> enrichment;
  std::optional<GatedAttentionBlock> attention_block;
  std::optional<FeedForwardMixer> mixer;
  LstmParams decoder_fwd;
  std::optional<LstmParams> decoder_bwd;
  Dense fc1;
  Dense fc2;

 private:
  ModelConfig config_;
  ParameterList params_;
};

// Single window [channels x T] -> scalar prediction.
Tensor tcft_bed_forward(const Tensor& x, const TcftBedModel& model, bool training,
                        Rng* rng = nullptr);

// Packs windows stored as row-major [channels x steps] into the model's
// sample-major input layout.
SequenceBatch pack_windows(std::span<const std::span<const double>> windows,
                           std::size_t channels, std::size_t steps);

}  // namespace tcft
