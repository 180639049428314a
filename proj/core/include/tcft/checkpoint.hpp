#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "tcft/model.hpp"

namespace tcft {

using CheckpointMetadata = std::map<std::string, std::string>;

// Versioned little-endian checkpoint:
//   "TCFTCKPT" | u32 version | u64 n + n bytes of JSON {"metadata", "model"}
//   | u64 tensor count | per tensor: u32 name length, name, u32 rank,
//     u64 dims[rank], f64 values (row-major)
// Tensors follow the model's parameter order; the encoding is canonical, so
// load followed by save reproduces the input bytes.
inline constexpr std::uint32_t kCheckpointVersion = 1;

std::vector<std::uint8_t> serialize_checkpoint(const TcftBedModel& model,
                                               const CheckpointMetadata& metadata = {});

struct LoadedCheckpoint {
  TcftBedModel model;
  CheckpointMetadata metadata;
};

LoadedCheckpoint deserialize_checkpoint(std::span<const std::uint8_t> bytes);

void save_checkpoint(const TcftBedModel& model, const std::filesystem::path& path,
                     const CheckpointMetadata& metadata = {});
LoadedCheckpoint load_checkpoint(const std::filesystem::path& path);

std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path);
void write_file_bytes(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);

}  // namespace tcft
