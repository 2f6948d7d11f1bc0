#include "danmaku/program.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>

#include "danmaku/error.hpp"

namespace danmaku {
namespace {

constexpr double kPi = std::numbers::pi;

constexpr std::array<ParamSpec, 6> kRingParams{{
    {"count", 4, 24, true},
    {"period", 4, 40, true},
    {"speed", 1, 5, false},
    {"radius", 2, 10, false},
    {"rotation", 0, 0.5, false},
    {"accel", -0.05, 0.05, false},
}};

constexpr std::array<ParamSpec, 8> kFanParams{{
    {"arms", 3, 9, true},
    {"spread", 0.2, 1.5, false},
    {"period", 8, 40, true},
    {"speed", 1.5, 5, false},
    {"radius", 2, 8, false},
    {"volley", 1, 4, true},
    {"direction", kPi / 4, 3 * kPi / 4, false},
    {"speed_step", 0, 0.5, false},
}};

constexpr std::array<ParamSpec, 7> kSpiralParams{{
    {"arms", 1, 2, true},
    {"step", 0.05, 0.6, false},
    {"period", 1, 6, true},
    {"speed", 1, 4, false},
    {"radius", 2, 8, false},
    {"curve", -0.02, 0.02, false},
    {"accel", -0.02, 0.05, false},
}};

constexpr std::array<ParamSpec, 6> kAimedParams{{
    {"period", 1, 12, true},
    {"speed", 2, 6, false},
    {"radius", 2, 6, false},
    {"count", 1, 3, true},
    {"spacing", 0.05, 0.3, false},
    {"sway", 0, 48, false},
}};

constexpr std::array<ParamSpec, 7> kSprayParams{{
    {"period", 1, 8, true},
    {"rate", 1, 3, true},
    {"speed_lo", 0.8, 2, false},
    {"speed_hi", 2, 5, false},
    {"radius", 2, 10, false},
    {"arc", 0.5, 2 * kPi, false},
    {"accel", -0.03, 0.03, false},
}};

constexpr std::array<ParamSpec, 7> kArmsParams{{
    {"arms", 3, 8, true},
    {"spin", 0.02, 0.3, false},
    {"period", 2, 8, true},
    {"speed", 1, 4, false},
    {"radius", 2, 8, false},
    {"curve", -0.03, 0.03, false},
    {"offset", 0, 40, false},
}};

const std::array<DanmakuTemplate, kTemplateCount> kTemplates{{
    {TemplateId::ring_burst, "ring_burst", kRingParams},
    {TemplateId::fan_volley, "fan_volley", kFanParams},
    {TemplateId::spiral, "spiral", kSpiralParams},
    {TemplateId::aimed_stream, "aimed_stream", kAimedParams},
    {TemplateId::random_spray, "random_spray", kSprayParams},
    {TemplateId::rotating_arms, "rotating_arms", kArmsParams},
}};

double clamp_field(double v, std::size_t field) {
  return std::clamp(v, kFeatureRanges[field].lo, kFeatureRanges[field].hi);
}

}  // namespace

std::span<const DanmakuTemplate> all_templates() { return kTemplates; }

const DanmakuTemplate& template_info(TemplateId id) {
  const auto i = static_cast<std::size_t>(id);
  if (i >= kTemplates.size()) throw ValidationError("unknown template id " + std::to_string(i));
  return kTemplates[i];
}

TemplateId parse_template(std::string_view name) {
  for (const auto& t : kTemplates) {
    if (t.name == name) return t.id;
  }
  throw ValidationError("unknown template '" + std::string(name) + "'");
}

std::string_view template_name(TemplateId id) { return template_info(id).name; }

void validate(const DanmakuProgram& program) {
  const auto& info = template_info(program.template_id);
  if (program.params.size() != info.arity()) {
    throw ValidationError("template '" + std::string(info.name) + "' takes " + std::to_string(info.arity()) +
                          " parameters, got " + std::to_string(program.params.size()));
  }
  for (std::size_t i = 0; i < info.arity(); ++i) {
    const auto& spec = info.params[i];
    const double v = program.params[i];
    if (!std::isfinite(v) || v < spec.lo || v > spec.hi) {
      throw ValidationError("template '" + std::string(info.name) + "' parameter '" + std::string(spec.name) +
                            "' = " + format_double(v) + " outside [" + format_double(spec.lo) + ", " +
                            format_double(spec.hi) + "]");
    }
  }
}

ShootingRule::ShootingRule(const DanmakuProgram& program) : program_(program), rng_state_(program.seed) {
  validate(program_);
}

double ShootingRule::next_uniform() {
  // splitmix64 stream; keeps the rule self-contained and copyable.
  std::uint64_t z = (rng_state_ += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  z ^= z >> 31;
  return static_cast<double>(z >> 11) * 0x1.0p-53;
}

double ShootingRule::p(std::size_t i) const { return program_.params[i]; }
int ShootingRule::pi(std::size_t i) const { return static_cast<int>(std::lround(program_.params[i])); }

void ShootingRule::emit(int frame, std::vector<BuilderCall>& out) {
  const double t = static_cast<double>(frame);
  switch (program_.template_id) {
    case TemplateId::ring_burst: {
      const int count = pi(0), period = pi(1);
      if (frame % period != 0) return;
      const double base = static_cast<double>(frame / period) * p(4);
      for (int j = 0; j < count; ++j) {
        BuilderCall c;
        c.angle = base + 2.0 * kPi * j / count;
        c.speed = p(2);
        c.radius = p(3);
        c.accel = p(5);
        out.push_back(c);
      }
      return;
    }
    case TemplateId::fan_volley: {
      const int arms = pi(0), period = pi(2), volley = pi(5);
      const int phase = frame % period;
      if (phase >= volley) return;
      for (int j = 0; j < arms; ++j) {
        BuilderCall c;
        c.angle = p(6) + p(1) * (static_cast<double>(j) / (arms - 1) - 0.5);
        c.speed = p(3) + phase * p(7);
        c.radius = p(4);
        out.push_back(c);
      }
      return;
    }
    case TemplateId::spiral: {
      const int arms = pi(0), period = pi(2);
      if (frame % period != 0) return;
      const double base = static_cast<double>(frame / period) * p(1);
      for (int a = 0; a < arms; ++a) {
        BuilderCall c;
        c.angle = base + 2.0 * kPi * a / arms;
        c.speed = p(3);
        c.radius = p(4);
        c.ang_vel = p(5);
        c.accel = p(6);
        out.push_back(c);
      }
      return;
    }
    case TemplateId::aimed_stream: {
      const int period = pi(0), count = pi(3);
      if (frame % period != 0) return;
      const double dx = p(5) * std::sin(0.05 * t);
      const double base = std::atan2(kAimY - kEmitterY, kAimX - (kEmitterX + dx));
      for (int j = 0; j < count; ++j) {
        BuilderCall c;
        c.spawn_dx = dx;
        c.angle = base + p(4) * (j - 0.5 * (count - 1));
        c.speed = p(1);
        c.radius = p(2);
        out.push_back(c);
      }
      return;
    }
    case TemplateId::random_spray: {
      const int period = pi(0), rate = pi(1);
      if (frame % period != 0) return;
      for (int j = 0; j < rate; ++j) {
        BuilderCall c;
        c.angle = 0.5 * kPi + p(5) * (next_uniform() - 0.5);
        c.speed = p(2) + (p(3) - p(2)) * next_uniform();
        c.spawn_dx = 16.0 * (next_uniform() - 0.5);
        c.radius = p(4) * (0.75 + 0.5 * next_uniform());
        c.accel = p(6);
        out.push_back(c);
      }
      return;
    }
    case TemplateId::rotating_arms: {
      const int arms = pi(0), period = pi(2);
      if (frame % period != 0) return;
      const double base = p(1) * t;
      for (int a = 0; a < arms; ++a) {
        const double theta = base + 2.0 * kPi * a / arms;
        BuilderCall c;
        c.spawn_dx = p(6) * std::cos(theta);
        c.spawn_dy = p(6) * std::sin(theta);
        c.angle = theta;
        c.speed = p(3);
        c.radius = p(4);
        c.ang_vel = p(5);
        out.push_back(c);
      }
      return;
    }
  }
}

std::vector<ShotEvent> unroll_events(const DanmakuProgram& program) {
  ShootingRule rule(program);
  std::vector<ShotEvent> events;
  events.reserve(kSequenceLength);
  std::vector<BuilderCall> calls;
  int last_frame = -1;
  for (int frame = 0; frame < kUnrollFrameLimit && events.size() < kSequenceLength; ++frame) {
    calls.clear();
    rule.emit(frame, calls);
    for (const auto& c : calls) {
      if (events.size() == kSequenceLength) break;
      ShotEvent e;
      e.itv = last_frame < 0 ? 0 : std::min(frame - last_frame, kMaxInterval);
      last_frame = frame;
      e.spawn_dx = clamp_field(c.spawn_dx, 1);
      e.spawn_dy = clamp_field(c.spawn_dy, 2);
      e.angle = wrap_angle(c.angle);
      e.speed = clamp_field(c.speed, 4);
      e.accel = clamp_field(c.accel, 5);
      e.ang_vel = clamp_field(c.ang_vel, 6);
      e.radius = clamp_field(c.radius, 7);
      events.push_back(e);
    }
  }
  if (events.size() < kSequenceLength) {
    throw StallError("template '" + std::string(template_name(program.template_id)) + "' emitted only " +
                     std::to_string(events.size()) + " shots within " + std::to_string(kUnrollFrameLimit) +
                     " frames");
  }
  return events;
}

ParametricSequence unroll(const DanmakuProgram& program) {
  return ParametricSequence::encode(unroll_events(program));
}

}  // namespace danmaku
