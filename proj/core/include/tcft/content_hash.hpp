#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace tcft {

// Hex SHA-1 of "blob <size>\0" + bytes, the same digest `git hash-object` prints.
std::string git_blob_hash(std::span<const std::uint8_t> bytes);
std::string git_blob_hash(const std::string& text);
std::string git_blob_hash_file(const std::filesystem::path& path);

// Hash over the (name, blob hash) pairs of several files, order-sensitive.
std::string combined_hash(const std::vector<std::filesystem::path>& files);

}  // namespace tcft
