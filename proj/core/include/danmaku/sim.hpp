#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "danmaku/codec.hpp"
#include "danmaku/program.hpp"

namespace danmaku {

struct SimConfig {
  int screen_w = 384;
  int screen_h = 448;
  double emitter_x = kEmitterX;
  double emitter_y = kEmitterY;
  double despawn_margin = 32.0;
  int cell_size = 8;
  int max_frames = 3600;
  double player_hit_radius = 3.0;
  /// Keep per-frame bullet positions (needed by render and the agent).
  bool record_snapshots = false;

  int grid_rows() const { return screen_h / cell_size; }
  int grid_cols() const { return screen_w / cell_size; }
  /// Throws ValidationError if the screen is not a whole number of cells.
  void validate() const;
};

struct BulletState {
  double x = 0.0;
  double y = 0.0;
  double angle = 0.0;
  double speed = 0.0;
  double accel = 0.0;
  double ang_vel = 0.0;
  double radius = 2.0;
  double weight = 0.25;  ///< radius / 8
};

struct BulletSnapshot {
  double x;
  double y;
  double radius;

  bool operator==(const BulletSnapshot&) const = default;
};

/// Result of simulating one sequence.
struct SimTrace {
  std::size_t shots = 0;  ///< L: builder calls actually spawned
  int t_shoot = 1;        ///< frame of the final call, at least 1
  int t_total = 0;        ///< frames simulated
  std::vector<double> momentum_per_frame;
  int rows = 0;
  int cols = 0;
  std::vector<std::uint8_t> covered;  ///< rows x cols, row-major
  std::size_t covered_cells = 0;
  /// Present only when SimConfig::record_snapshots is set.
  std::vector<std::vector<BulletSnapshot>> frames;

  bool operator==(const SimTrace&) const = default;
};

BulletState spawn(const ShotEvent& event, double emitter_x, double emitter_y);

/// Turn, accelerate (speed floored at 0), then move along the new heading.
void step_frame(BulletState& bullet);

bool on_field(const BulletState& bullet, const SimConfig& config);

/// Whether the open disc at (x, y) overlaps the cell rectangle.
bool disc_touches_cell(double x, double y, double radius, int row, int col, int cell_size);

/// Marks every grid cell the disc overlaps; returns how many were newly set.
std::size_t mark_coverage(double x, double y, double radius, int rows, int cols, int cell_size,
                          std::vector<std::uint8_t>& covered);

/// Bullet i is spawned at frame sum(itv[0..i]); each frame spawns, records
/// momentum/coverage and then advances. The run ends once every call has
/// been issued and the field is empty, or at max_frames.
SimTrace run(std::span<const ShotEvent> events, const SimConfig& config = {});
SimTrace run(const ParametricSequence& seq, const SimConfig& config = {});

/// {"L", "T_shoot", "T_total", "momentum_sum_per_frame"?, "covered_cells", "r", "c"}
std::string trace_summary_json(const SimTrace& trace, bool include_momentum);

struct FrameImage {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> rgb;  ///< row-major, 3 bytes per pixel

  bool operator==(const FrameImage&) const = default;
};

inline constexpr std::uint8_t kBackground[3] = {12, 12, 28};

/// RGB used for a bullet of the given radius.
std::array<std::uint8_t, 3> bullet_color(double radius);

/// Pixel (px, py) is painted when its center lies within the bullet radius.
FrameImage render_frame(std::span<const BulletSnapshot> bullets, const SimConfig& config = {});

/// Binary P6.
std::string encode_ppm(const FrameImage& image);

/// Writes frame_NNNNN.ppm for frames 0, stride, 2*stride, ... < t_total.
std::vector<std::filesystem::path> render_frames(const SimTrace& trace, int stride, const std::filesystem::path& out_dir,
                                                 const SimConfig& config = {});

}  // namespace danmaku
