#include "danmaku/codec.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <json.hpp>
#include <numbers>
#include <sstream>

#include "danmaku/error.hpp"

namespace danmaku {
namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr double kClampSlack = 1e-9;

std::array<double, kFeatureDims> raw_fields(const ShotEvent& e) {
  return {static_cast<double>(e.itv), e.spawn_dx, e.spawn_dy, e.angle, e.speed, e.accel, e.ang_vel, e.radius};
}

}  // namespace

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

double wrap_angle(double radians) {
  double a = std::fmod(radians, kTwoPi);
  if (a < 0.0) a += kTwoPi;
  if (a >= kTwoPi) a = 0.0;
  return a;
}

void validate(const ShotEvent& event) {
  const auto fields = raw_fields(event);
  for (std::size_t i = 0; i < kFeatureDims; ++i) {
    const auto& r = kFeatureRanges[i];
    const bool upper_open = r.name == "angle";
    const double v = fields[i];
    if (!std::isfinite(v) || v < r.lo || (upper_open ? v >= r.hi : v > r.hi)) {
      throw ValidationError("shot event field '" + std::string(r.name) + "' = " + format_double(v) +
                            " outside [" + format_double(r.lo) + ", " + format_double(r.hi) +
                            (upper_open ? ")" : "]"));
    }
  }
}

FeatureRow normalize(const ShotEvent& event) {
  validate(event);
  const auto fields = raw_fields(event);
  FeatureRow row{};
  for (std::size_t i = 0; i < kFeatureDims; ++i) {
    const auto& r = kFeatureRanges[i];
    row[i] = (fields[i] - r.lo) / (r.hi - r.lo);
  }
  return row;
}

ShotEvent denormalize(const FeatureRow& row) {
  std::array<double, kFeatureDims> v{};
  for (std::size_t i = 0; i < kFeatureDims; ++i) {
    const double f = row[i];
    if (!std::isfinite(f) || f < -kClampSlack || f > 1.0 + kClampSlack) {
      throw ValidationError("feature '" + std::string(kFeatureRanges[i].name) + "' = " + format_double(f) +
                            " outside [0, 1]");
    }
    const double c = std::clamp(f, 0.0, 1.0);
    const auto& r = kFeatureRanges[i];
    v[i] = r.lo + c * (r.hi - r.lo);
  }
  ShotEvent e;
  e.itv = static_cast<int>(std::floor(v[0] + 0.5));
  e.spawn_dx = v[1];
  e.spawn_dy = v[2];
  e.angle = wrap_angle(v[3]);
  e.speed = v[4];
  e.accel = v[5];
  e.ang_vel = v[6];
  e.radius = v[7];
  return e;
}

ParametricSequence ParametricSequence::from_rows(std::span<const FeatureRow> rows) {
  if (rows.size() != kSequenceLength) {
    throw ShapeError("sequence: expected " + std::to_string(kSequenceLength) + " rows, got " +
                     std::to_string(rows.size()));
  }
  ParametricSequence s;
  for (std::size_t i = 0; i < kSequenceLength; ++i) {
    for (std::size_t j = 0; j < kFeatureDims; ++j) {
      const double v = rows[i][j];
      if (!(v >= 0.0 && v <= 1.0)) {
        throw ValidationError("sequence: entry (" + std::to_string(i) + ", " + std::to_string(j) + ") = " +
                              format_double(v) + " outside [0, 1]");
      }
    }
    s.rows_[i] = rows[i];
  }
  return s;
}

ParametricSequence ParametricSequence::from_tensor(const Tensor& t) {
  const Shape& sh = t.shape();
  const bool ok = (sh.size() == 2 && sh[0] == kSequenceLength && sh[1] == kFeatureDims) ||
                  (sh.size() == 3 && sh[0] == 1 && sh[1] == kSequenceLength && sh[2] == kFeatureDims);
  if (!ok) throw ShapeError("sequence: tensor shape " + shape_string(sh) + " is not [64x8]");
  std::vector<FeatureRow> rows(kSequenceLength);
  for (std::size_t i = 0; i < kSequenceLength; ++i)
    for (std::size_t j = 0; j < kFeatureDims; ++j) rows[i][j] = t[i * kFeatureDims + j];
  return from_rows(rows);
}

ParametricSequence ParametricSequence::encode(std::span<const ShotEvent> events) {
  if (events.size() != kSequenceLength) {
    throw ShapeError("sequence: expected " + std::to_string(kSequenceLength) + " events, got " +
                     std::to_string(events.size()));
  }
  std::vector<FeatureRow> rows;
  rows.reserve(kSequenceLength);
  for (const auto& e : events) rows.push_back(normalize(e));
  return from_rows(rows);
}

std::vector<ShotEvent> ParametricSequence::decode() const {
  std::vector<ShotEvent> out;
  out.reserve(kSequenceLength);
  for (const auto& r : rows_) out.push_back(denormalize(r));
  return out;
}

Tensor ParametricSequence::to_tensor() const {
  Tensor t({kSequenceLength, kFeatureDims});
  for (std::size_t i = 0; i < kSequenceLength; ++i)
    for (std::size_t j = 0; j < kFeatureDims; ++j) t.at(i, j) = rows_[i][j];
  return t;
}

std::string to_json(const ParametricSequence& seq) {
  std::string out = "{\"version\":1,\"length\":64,\"dims\":8,\"features\":[";
  for (std::size_t i = 0; i < kSequenceLength; ++i) {
    out += i ? ",[" : "[";
    for (std::size_t j = 0; j < kFeatureDims; ++j) {
      if (j) out += ",";
      out += format_double(seq.row(i)[j]);
    }
    out += "]";
  }
  out += "]}\n";
  return out;
}

ParametricSequence sequence_from_json(std::string_view text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("sequence json: ") + e.what());
  }
  try {
    if (doc.at("version").get<int>() != 1) throw ValidationError("sequence json: unsupported version");
    if (doc.at("length").get<std::size_t>() != kSequenceLength || doc.at("dims").get<std::size_t>() != kFeatureDims) {
      throw ValidationError("sequence json: length/dims must be 64/8");
    }
    const auto& features = doc.at("features");
    if (!features.is_array() || features.size() != kSequenceLength) {
      throw ValidationError("sequence json: features must hold 64 rows");
    }
    std::vector<FeatureRow> rows(kSequenceLength);
    for (std::size_t i = 0; i < kSequenceLength; ++i) {
      const auto& r = features[i];
      if (!r.is_array() || r.size() != kFeatureDims) {
        throw ValidationError("sequence json: row " + std::to_string(i) + " must hold 8 values");
      }
      for (std::size_t j = 0; j < kFeatureDims; ++j) rows[i][j] = r[j].get<double>();
    }
    return ParametricSequence::from_rows(rows);
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("sequence json: ") + e.what());
  }
}

void save_sequence(const ParametricSequence& seq, const std::filesystem::path& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open " + path.string() + " for writing");
  f << to_json(seq);
  if (!f) throw IoError("write failed for " + path.string());
}

ParametricSequence load_sequence(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw ValidationError("cannot open sequence file " + path.string());
  std::ostringstream ss;
  ss << f.rdbuf();
  return sequence_from_json(ss.str());
}

}  // namespace danmaku
