#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "danmaku/tensor.hpp"

namespace danmaku {

struct NamedTensor {
  std::string name;
  Tensor value;
};

/// Serialized network weights.
///
/// Binary layout (little-endian):
///   "DMKCKPT\0"  u32 version
///   u64 header_len, header bytes (JSON: architecture, seed, iteration, meta)
///   u64 tensor_count, then per tensor:
///     u32 name_len, name bytes, u32 rank, u64 dims[rank], f64 values (row-major)
struct Checkpoint {
  static constexpr std::uint32_t kVersion = 1;

  std::string architecture;
  std::uint64_t seed = 0;
  std::uint64_t iteration = 0;
  std::map<std::string, std::string> meta;
  std::vector<NamedTensor> tensors;

  /// Copies current parameter values in the given order.
  static Checkpoint capture(std::string architecture, std::uint64_t seed, std::uint64_t iteration,
                            std::span<Parameter* const> params);

  /// Writes stored values into `params`, matched by name. Throws
  /// ValidationError on a missing name or shape mismatch.
  void restore(std::span<Parameter* const> params) const;

  std::string serialize() const;
  static Checkpoint deserialize(const std::string& bytes);

  void save(const std::filesystem::path& path) const;
  static Checkpoint load(const std::filesystem::path& path);
};

}  // namespace danmaku
