#include "tcft/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>
#include <json.hpp>

#include "tcft/errors.hpp"

namespace tcft {

static_assert(std::endian::native == std::endian::little,
              "checkpoint encoding assumes a little-endian host");

namespace {

constexpr char kMagic[8] = {'T', 'C', 'F', 'T', 'C', 'K', 'P', 'T'};

class Writer {
 public:
  template <class T>
  void put(T v) {
    const auto* p = reinterpret_cast<const std::uint8_t*>(&v);
    bytes.insert(bytes.end(), p, p + sizeof(T));
  }
  void put_bytes(const void* data, std::size_t n) {
    const auto* p = static_cast<const std::uint8_t*>(data);
    bytes.insert(bytes.end(), p, p + n);
  }
  std::vector<std::uint8_t> bytes;
};

class Reader {
 public:
  explicit Reader(std::span<const std::uint8_t> b) : bytes_(b) {}
  template <class T>
  T get() {
    T v;
    std::memcpy(&v, take(sizeof(T)), sizeof(T));
    return v;
  }
  const std::uint8_t* take(std::size_t n) {
    if (pos_ + n > bytes_.size()) throw ParseError("checkpoint truncated", 0);
    const auto* p = bytes_.data() + pos_;
    pos_ += n;
    return p;
  }
  bool done() const { return pos_ == bytes_.size(); }

 private:
  std::span<const std::uint8_t> bytes_;
  std::size_t pos_ = 0;
};

}  // namespace

std::vector<std::uint8_t> serialize_checkpoint(const TcftBedModel& model,
                                               const CheckpointMetadata& metadata) {
  nlohmann::json header;
  header["model"] = nlohmann::json::parse(to_json(model.config()));
  header["metadata"] = metadata;
  const std::string text = header.dump();

  Writer w;
  w.put_bytes(kMagic, sizeof(kMagic));
  w.put<std::uint32_t>(kCheckpointVersion);
  w.put<std::uint64_t>(text.size());
  w.put_bytes(text.data(), text.size());
  const auto& params = model.parameters();
  w.put<std::uint64_t>(params.size());
  for (const auto& p : params) {
    w.put<std::uint32_t>(static_cast<std::uint32_t>(p.name.size()));
    w.put_bytes(p.name.data(), p.name.size());
    w.put<std::uint32_t>(static_cast<std::uint32_t>(p.tensor.dim()));
    for (auto d : p.tensor.shape()) w.put<std::uint64_t>(d);
    const auto v = p.tensor.values();
    w.put_bytes(v.data(), v.size() * sizeof(double));
  }
  return std::move(w.bytes);
}

LoadedCheckpoint deserialize_checkpoint(std::span<const std::uint8_t> bytes) {
  Reader r(bytes);
  if (std::memcmp(r.take(sizeof(kMagic)), kMagic, sizeof(kMagic)) != 0) {
    throw ParseError("not a TCFT checkpoint (bad magic)", 0);
  }
  const auto version = r.get<std::uint32_t>();
  if (version != kCheckpointVersion) {
    throw ParseError("unsupported checkpoint version " + std::to_string(version), 0);
  }
  const auto text_len = r.get<std::uint64_t>();
  const auto* text = reinterpret_cast<const char*>(r.take(text_len));
  nlohmann::json header;
  try {
    header = nlohmann::json::parse(text, text + text_len);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("checkpoint header: ") + e.what(), 0);
  }
  TcftBedModel model(model_config_from_json(header.at("model").dump()));
  auto metadata = header.at("metadata").get<CheckpointMetadata>();

  const auto count = r.get<std::uint64_t>();
  auto params = model.parameters();  // handles share the model's storage
  if (count != params.size()) {
    throw ParseError("checkpoint holds " + std::to_string(count) + " tensors, model has " +
                     std::to_string(params.size()), 0);
  }
  for (auto& p : params) {
    const auto name_len = r.get<std::uint32_t>();
    const std::string name(reinterpret_cast<const char*>(r.take(name_len)), name_len);
    if (name != p.name) throw ParseError("checkpoint tensor '" + name + "' where '" + p.name + "' expected", 0);
    const auto rank = r.get<std::uint32_t>();
    Shape shape(rank);
    for (auto& d : shape) d = r.get<std::uint64_t>();
    if (shape != p.tensor.shape()) {
      throw DimensionError("checkpoint tensor '" + name + "' has shape " + shape_string(shape) +
                           ", model expects " + shape_string(p.tensor.shape()));
    }
    auto dst = p.tensor.mutable_values();
    std::memcpy(dst.data(), r.take(dst.size() * sizeof(double)), dst.size() * sizeof(double));
  }
  if (!r.done()) throw ParseError("trailing bytes after checkpoint tensors", 0);
  return {std::move(model), std::move(metadata)};
}

std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_file_bytes(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw std::runtime_error("failed writing " + path.string());
}

void save_checkpoint(const TcftBedModel& model, const std::filesystem::path& path,
                     const CheckpointMetadata& metadata) {
  write_file_bytes(path, serialize_checkpoint(model, metadata));
}

LoadedCheckpoint load_checkpoint(const std::filesystem::path& path) {
  return deserialize_checkpoint(read_file_bytes(path));
}

}  // namespace tcft
