#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "danmaku/codec.hpp"

namespace danmaku {

/// Shooting-rule families.
enum class TemplateId : int {
  ring_burst = 0,
  fan_volley = 1,
  spiral = 2,
  aimed_stream = 3,
  random_spray = 4,
  rotating_arms = 5,
};

inline constexpr std::size_t kTemplateCount = 6;
inline constexpr int kUnrollFrameLimit = 3600;

/// Emitter and aim point shared by the templates and the simulator defaults.
inline constexpr double kEmitterX = 192.0;
inline constexpr double kEmitterY = 120.0;
inline constexpr double kAimX = 192.0;
inline constexpr double kAimY = 400.0;

struct ParamSpec {
  std::string_view name;
  double lo;
  double hi;
  bool integral;  ///< rounded to the nearest integer when the rule runs
};

struct DanmakuTemplate {
  TemplateId id;
  std::string_view name;
  std::span<const ParamSpec> params;

  std::size_t arity() const { return params.size(); }
};

std::span<const DanmakuTemplate> all_templates();
const DanmakuTemplate& template_info(TemplateId id);
/// Throws ValidationError for an unknown name.
TemplateId parse_template(std::string_view name);
std::string_view template_name(TemplateId id);

/// A shooting rule plus its parameter vector.
struct DanmakuProgram {
  TemplateId template_id = TemplateId::ring_burst;
  std::vector<double> params;
  std::uint64_t seed = 0;

  bool operator==(const DanmakuProgram&) const = default;
};

/// Arity and bounds check.
void validate(const DanmakuProgram& program);

/// Bullet-builder arguments for one call, before interval compression.
struct BuilderCall {
  double spawn_dx = 0.0;
  double spawn_dy = 0.0;
  double angle = 0.0;
  double speed = 0.0;
  double accel = 0.0;
  double ang_vel = 0.0;
  double radius = 2.0;
};

/// F(t | p): appends the calls issued at `frame` (0-based) to `out` in
/// builder order. Frames must be visited in increasing order; random
/// templates draw from a stream seeded by the program seed.
class ShootingRule {
 public:
  explicit ShootingRule(const DanmakuProgram& program);
  void emit(int frame, std::vector<BuilderCall>& out);

 private:
  DanmakuProgram program_;
  std::uint64_t rng_state_;
  double next_uniform();
  double p(std::size_t i) const;
  int pi(std::size_t i) const;
};

/// Physical events: the rule is run frame by frame until 64 calls have been
/// collected, intervals are the frame gaps (0 inside a frame, first = 0,
/// capped at 60) and fields are clamped to their ranges.
/// Throws StallError if fewer than 64 calls happen within 3600 frames.
std::vector<ShotEvent> unroll_events(const DanmakuProgram& program);

ParametricSequence unroll(const DanmakuProgram& program);

}  // namespace danmaku
