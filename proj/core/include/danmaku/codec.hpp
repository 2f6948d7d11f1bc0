#pragma once

#include <array>
#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "danmaku/tensor.hpp"

namespace danmaku {

inline constexpr std::size_t kSequenceLength = 64;
inline constexpr std::size_t kFeatureDims = 8;
inline constexpr int kMaxInterval = 60;

/// One bullet-builder call in physical units.
struct ShotEvent {
  int itv = 0;            ///< frames since the previous call, [0, 60]
  double spawn_dx = 0.0;  ///< px from emitter, [-64, 64]
  double spawn_dy = 0.0;  ///< px from emitter, [-64, 64]
  double angle = 0.0;     ///< rad, [0, 2pi)
  double speed = 0.0;     ///< px/frame, [0, 6]
  double accel = 0.0;     ///< px/frame^2, [-0.1, 0.1]
  double ang_vel = 0.0;   ///< rad/frame, [-0.2, 0.2]
  double radius = 2.0;    ///< px, [2, 16]

  bool operator==(const ShotEvent&) const = default;
};

struct FeatureRange {
  std::string_view name;
  double lo;
  double hi;
};

/// Column order of a normalized row.
inline constexpr std::array<FeatureRange, kFeatureDims> kFeatureRanges{{
    {"itv", 0.0, 60.0},
    {"spawn_dx", -64.0, 64.0},
    {"spawn_dy", -64.0, 64.0},
    {"angle", 0.0, 6.283185307179586},
    {"speed", 0.0, 6.0},
    {"accel", -0.1, 0.1},
    {"ang_vel", -0.2, 0.2},
    {"radius", 2.0, 16.0},
}};

using FeatureRow = std::array<double, kFeatureDims>;

/// Wraps an angle into [0, 2pi).
double wrap_angle(double radians);

/// Throws ValidationError naming the first field outside its range.
void validate(const ShotEvent& event);

FeatureRow normalize(const ShotEvent& event);

/// Inverse of normalize. Entries within 1e-9 outside [0, 1] are clamped,
/// anything further out is rejected. itv rounds half-up to a whole frame.
ShotEvent denormalize(const FeatureRow& row);

/// Fixed 64 x 8 matrix of normalized shot features, all entries in [0, 1].
class ParametricSequence {
 public:
  ParametricSequence() = default;

  static ParametricSequence from_rows(std::span<const FeatureRow> rows);
  /// Accepts [64, 8] or [1, 64, 8].
  static ParametricSequence from_tensor(const Tensor& t);
  static ParametricSequence encode(std::span<const ShotEvent> events);

  const FeatureRow& row(std::size_t i) const { return rows_.at(i); }
  std::span<const FeatureRow> rows() const { return rows_; }
  std::vector<ShotEvent> decode() const;
  Tensor to_tensor() const;

  bool operator==(const ParametricSequence&) const = default;

 private:
  std::array<FeatureRow, kSequenceLength> rows_{};
};

/// {"version":1,"length":64,"dims":8,"features":[[...] x 64]}, every value
/// printed with 17 significant digits.
std::string to_json(const ParametricSequence& seq);
ParametricSequence sequence_from_json(std::string_view text);

void save_sequence(const ParametricSequence& seq, const std::filesystem::path& path);
ParametricSequence load_sequence(const std::filesystem::path& path);

/// Formats a double with 17 significant digits ("%.17g").
std::string format_double(double v);

}  // namespace danmaku
