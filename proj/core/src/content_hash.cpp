#include "tcft/content_hash.hpp"

#include <openssl/evp.h>

#include <memory>
#include <stdexcept>

#include "tcft/checkpoint.hpp"

namespace tcft {

namespace {

std::string sha1_hex(std::span<const std::uint8_t> prefix, std::span<const std::uint8_t> body) {
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), EVP_MD_CTX_free);
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha1(), nullptr) != 1 ||
      EVP_DigestUpdate(ctx.get(), prefix.data(), prefix.size()) != 1 ||
      EVP_DigestUpdate(ctx.get(), body.data(), body.size()) != 1 ||
      EVP_DigestFinal_ex(ctx.get(), digest, &len) != 1) {
    throw std::runtime_error("SHA-1 digest failed");
  }
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out += kHex[digest[i] >> 4];
    out += kHex[digest[i] & 0xF];
  }
  return out;
}

}  // namespace

std::string git_blob_hash(std::span<const std::uint8_t> bytes) {
  const std::string header = "blob " + std::to_string(bytes.size()) + '\0';
  return sha1_hex({reinterpret_cast<const std::uint8_t*>(header.data()), header.size()}, bytes);
}

std::string git_blob_hash(const std::string& text) {
  return git_blob_hash({reinterpret_cast<const std::uint8_t*>(text.data()), text.size()});
}

std::string git_blob_hash_file(const std::filesystem::path& path) {
  return git_blob_hash(read_file_bytes(path));
}

std::string combined_hash(const std::vector<std::filesystem::path>& files) {
  std::string listing;
  for (const auto& f : files) listing += git_blob_hash_file(f) + "  " + f.filename().string() + "\n";
  return git_blob_hash(listing);
}

}  // namespace tcft
