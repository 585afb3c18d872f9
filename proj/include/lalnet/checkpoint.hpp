#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "lalnet/config.hpp"
#include "lalnet/params.hpp"

namespace lalnet {

// Binary layout: "LALN", u32 version, u32 entry count, then per entry
// u16 name length + name, u8 dtype (0 f32, 1 f64, 2 u8), u8 ndim, u32 extents, payload;
// trailing CRC32 of everything before it. All integers little-endian.
//
// Entries: parameters under their own names, "adam.m/<name>", "adam.v/<name>",
// "adam.step" (f64 scalar) and "meta.config" (u8 text of the model config).
class CheckpointError : public std::runtime_error {
 public:
  enum class Kind { io, bad_magic, unsupported_version, truncated, checksum, malformed };
  CheckpointError(Kind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  Kind kind() const { return kind_; }

 private:
  Kind kind_;
};

inline constexpr uint32_t kCheckpointVersion = 1;

struct Checkpoint {
  ModelConfig config;
  ParamStore<float> store;
};

std::vector<uint8_t> serialize_checkpoint(const ParamStore<float>& store, const ModelConfig& config);
Checkpoint deserialize_checkpoint(const std::vector<uint8_t>& bytes);

void save_checkpoint(const std::string& path, const ParamStore<float>& store, const ModelConfig& config);
Checkpoint load_checkpoint(const std::string& path);

}  // namespace lalnet
