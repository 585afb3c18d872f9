#include "lalnet/checkpoint.hpp"

#include <zlib.h>

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>

namespace lalnet {

static_assert(std::endian::native == std::endian::little, "checkpoint I/O assumes a little-endian host");

namespace {

enum : uint8_t { kF32 = 0, kF64 = 1, kU8 = 2 };

class Writer {
 public:
  template <class V>
  void put(V v) {
    const auto* p = reinterpret_cast<const uint8_t*>(&v);
    bytes.insert(bytes.end(), p, p + sizeof(V));
  }
  void raw(const void* data, size_t n) {
    const auto* p = static_cast<const uint8_t*>(data);
    bytes.insert(bytes.end(), p, p + n);
  }
  void entry(const std::string& name, uint8_t dtype, const Shape& shape, const void* data, size_t nbytes) {
    if (name.size() > 0xFFFF) throw CheckpointError(CheckpointError::Kind::malformed, "entry name too long: " + name);
    put(static_cast<uint16_t>(name.size()));
    raw(name.data(), name.size());
    put(dtype);
    put(static_cast<uint8_t>(shape.size()));
    for (int64_t d : shape) put(static_cast<uint32_t>(d));
    raw(data, nbytes);
  }
  void tensor(const std::string& name, const Tensor<float>& t) {
    entry(name, kF32, t.shape(), t.storage().data(), t.storage().size() * sizeof(float));
  }
  std::vector<uint8_t> bytes;
};

class Reader {
 public:
  Reader(const uint8_t* data, size_t size) : data_(data), size_(size) {}
  template <class V>
  V get() {
    V v;
    std::memcpy(&v, take(sizeof(V)), sizeof(V));
    return v;
  }
  const uint8_t* take(size_t n) {
    if (n > size_ - pos_) throw CheckpointError(CheckpointError::Kind::truncated, "unexpected end of checkpoint");
    const uint8_t* p = data_ + pos_;
    pos_ += n;
    return p;
  }
  size_t pos() const { return pos_; }

 private:
  const uint8_t* data_;
  size_t size_;
  size_t pos_ = 0;
};

uint32_t crc_of(const uint8_t* data, size_t n) {
  return static_cast<uint32_t>(crc32(crc32(0L, Z_NULL, 0), data, static_cast<uInt>(n)));
}

}  // namespace

std::vector<uint8_t> serialize_checkpoint(const ParamStore<float>& store, const ModelConfig& config) {
  const auto& adam = store.adam();
  const uint32_t count = static_cast<uint32_t>(store.tensors().size() + adam.m.size() + adam.v.size() + 2);
  Writer w;
  w.raw("LALN", 4);
  w.put(kCheckpointVersion);
  w.put(count);
  const std::string text = model_config_text(config);
  w.entry("meta.config", kU8, {static_cast<int64_t>(text.size())}, text.data(), text.size());
  const double step = static_cast<double>(adam.step);
  w.entry("adam.step", kF64, {}, &step, sizeof(double));
  for (const auto& [k, t] : store.tensors()) w.tensor(k, t);
  for (const auto& [k, t] : adam.m) w.tensor("adam.m/" + k, t);
  for (const auto& [k, t] : adam.v) w.tensor("adam.v/" + k, t);
  w.put(crc_of(w.bytes.data(), w.bytes.size()));
  return std::move(w.bytes);
}

Checkpoint deserialize_checkpoint(const std::vector<uint8_t>& bytes) {
  using Kind = CheckpointError::Kind;
  Reader r(bytes.data(), bytes.size());
  if (std::memcmp(r.take(4), "LALN", 4) != 0) throw CheckpointError(Kind::bad_magic, "not a checkpoint (bad magic)");
  const auto version = r.get<uint32_t>();
  if (version != kCheckpointVersion) {
    throw CheckpointError(Kind::unsupported_version, "unsupported checkpoint version " + std::to_string(version));
  }
  const auto count = r.get<uint32_t>();

  Checkpoint out;
  bool have_config = false;
  for (uint32_t i = 0; i < count; ++i) {
    const auto name_len = r.get<uint16_t>();
    std::string name(reinterpret_cast<const char*>(r.take(name_len)), name_len);
    const auto dtype = r.get<uint8_t>();
    const auto ndim = r.get<uint8_t>();
    Shape shape;
    for (int d = 0; d < ndim; ++d) shape.push_back(r.get<uint32_t>());
    const auto n = static_cast<size_t>(numel(shape));
    if (dtype == kU8) {
      const auto* p = r.take(n);
      if (name != "meta.config") throw CheckpointError(Kind::malformed, "unexpected byte entry " + name);
      out.config = Settings::parse(std::string(reinterpret_cast<const char*>(p), n)).model();
      have_config = true;
    } else if (dtype == kF64) {
      const auto* p = r.take(n * sizeof(double));
      if (name != "adam.step" || n != 1) throw CheckpointError(Kind::malformed, "unexpected f64 entry " + name);
      double step;
      std::memcpy(&step, p, sizeof(double));
      out.store.adam().step = static_cast<int64_t>(step);
    } else if (dtype == kF32) {
      const auto* p = r.take(n * sizeof(float));
      std::vector<float> data(n);
      std::memcpy(data.data(), p, n * sizeof(float));
      Tensor<float> t(shape, std::move(data));
      if (name.rfind("adam.m/", 0) == 0) {
        out.store.adam().m[name.substr(7)] = std::move(t);
      } else if (name.rfind("adam.v/", 0) == 0) {
        out.store.adam().v[name.substr(7)] = std::move(t);
      } else {
        out.store.insert(name, std::move(t));
      }
    } else {
      throw CheckpointError(Kind::malformed, "unknown dtype tag " + std::to_string(dtype) + " for " + name);
    }
  }
  const size_t body = r.pos();
  const auto stored = r.get<uint32_t>();
  if (r.pos() != bytes.size()) throw CheckpointError(Kind::malformed, "trailing bytes after checkpoint");
  if (stored != crc_of(bytes.data(), body)) throw CheckpointError(Kind::checksum, "checkpoint checksum mismatch");
  if (!have_config) throw CheckpointError(Kind::malformed, "checkpoint has no model config");
  return out;
}

void save_checkpoint(const std::string& path, const ParamStore<float>& store, const ModelConfig& config) {
  const auto bytes = serialize_checkpoint(store, config);
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw CheckpointError(CheckpointError::Kind::io, "cannot open " + path + " for writing");
  f.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!f) throw CheckpointError(CheckpointError::Kind::io, "failed writing " + path);
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw CheckpointError(CheckpointError::Kind::io, "cannot open " + path);
  std::vector<uint8_t> bytes((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
  return deserialize_checkpoint(bytes);
}

}  // namespace lalnet
