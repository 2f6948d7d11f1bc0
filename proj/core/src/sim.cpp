#include "danmaku/sim.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>

#include "danmaku/error.hpp"

namespace danmaku {

void SimConfig::validate() const {
  if (cell_size <= 0 || screen_w <= 0 || screen_h <= 0 || screen_w % cell_size != 0 || screen_h % cell_size != 0) {
    throw ValidationError("sim config: screen " + std::to_string(screen_w) + "x" + std::to_string(screen_h) +
                          " is not divisible by cell size " + std::to_string(cell_size));
  }
  if (max_frames < 1) throw ValidationError("sim config: max_frames must be positive");
}

BulletState spawn(const ShotEvent& event, double emitter_x, double emitter_y) {
  BulletState b;
  b.x = emitter_x + event.spawn_dx;
  b.y = emitter_y + event.spawn_dy;
  b.angle = event.angle;
  b.speed = event.speed;
  b.accel = event.accel;
  b.ang_vel = event.ang_vel;
  b.radius = event.radius;
  b.weight = event.radius / 8.0;
  return b;
}

void step_frame(BulletState& b) {
  b.angle += b.ang_vel;
  b.speed = std::max(0.0, b.speed + b.accel);
  b.x += b.speed * std::cos(b.angle);
  b.y += b.speed * std::sin(b.angle);
}

bool on_field(const BulletState& b, const SimConfig& c) {
  const double m = c.despawn_margin;
  return b.x > -m && b.x < c.screen_w + m && b.y > -m && b.y < c.screen_h + m;
}

bool disc_touches_cell(double x, double y, double radius, int row, int col, int cell_size) {
  const double x0 = static_cast<double>(col * cell_size), y0 = static_cast<double>(row * cell_size);
  const double nx = std::clamp(x, x0, x0 + cell_size);
  const double ny = std::clamp(y, y0, y0 + cell_size);
  const double dx = x - nx, dy = y - ny;
  return dx * dx + dy * dy < radius * radius;
}

std::size_t mark_coverage(double x, double y, double radius, int rows, int cols, int cell_size,
                          std::vector<std::uint8_t>& covered) {
  const int c0 = std::max(0, static_cast<int>(std::floor((x - radius) / cell_size)));
  const int c1 = std::min(cols - 1, static_cast<int>(std::floor((x + radius) / cell_size)));
  const int r0 = std::max(0, static_cast<int>(std::floor((y - radius) / cell_size)));
  const int r1 = std::min(rows - 1, static_cast<int>(std::floor((y + radius) / cell_size)));
  std::size_t added = 0;
  for (int r = r0; r <= r1; ++r) {
    for (int c = c0; c <= c1; ++c) {
      auto& cell = covered[static_cast<std::size_t>(r * cols + c)];
      if (cell || !disc_touches_cell(x, y, radius, r, c, cell_size)) continue;
      cell = 1;
      ++added;
    }
  }
  return added;
}

SimTrace run(std::span<const ShotEvent> events, const SimConfig& config) {
  config.validate();
  SimTrace trace;
  trace.rows = config.grid_rows();
  trace.cols = config.grid_cols();
  trace.covered.assign(static_cast<std::size_t>(trace.rows * trace.cols), 0);

  std::vector<long long> emit_frame(events.size());
  long long acc = 0;
  for (std::size_t i = 0; i < events.size(); ++i) {
    acc += events[i].itv;
    emit_frame[i] = acc;
  }

  std::vector<BulletState> live;
  live.reserve(events.size());
  std::size_t next = 0;
  for (int f = 0; f < config.max_frames; ++f) {
    while (next < events.size() && emit_frame[next] == f) {
      live.push_back(spawn(events[next], config.emitter_x, config.emitter_y));
      ++next;
      ++trace.shots;
    }
    double momentum = 0.0;
    for (const auto& b : live) {
      momentum += b.weight * b.speed;
      trace.covered_cells += mark_coverage(b.x, b.y, b.radius, trace.rows, trace.cols, config.cell_size, trace.covered);
    }
    trace.momentum_per_frame.push_back(momentum);
    if (config.record_snapshots) {
      auto& snap = trace.frames.emplace_back();
      snap.reserve(live.size());
      for (const auto& b : live) snap.push_back({b.x, b.y, b.radius});
    }
    trace.t_total = f + 1;
    for (auto& b : live) step_frame(b);
    std::erase_if(live, [&](const BulletState& b) { return !on_field(b, config); });
    if (next == events.size() && live.empty()) break;
  }
  const long long last = events.empty() ? 0 : emit_frame.back();
  trace.t_shoot = static_cast<int>(std::clamp<long long>(last, 1, trace.t_total));
  return trace;
}

SimTrace run(const ParametricSequence& seq, const SimConfig& config) {
  const auto events = seq.decode();
  return run(events, config);
}

std::string trace_summary_json(const SimTrace& trace, bool include_momentum) {
  std::string out = "{\"L\":" + std::to_string(trace.shots) + ",\"T_shoot\":" + std::to_string(trace.t_shoot) +
                    ",\"T_total\":" + std::to_string(trace.t_total);
  if (include_momentum) {
    out += ",\"momentum_sum_per_frame\":[";
    for (std::size_t i = 0; i < trace.momentum_per_frame.size(); ++i) {
      if (i) out += ",";
      out += format_double(trace.momentum_per_frame[i]);
    }
    out += "]";
  }
  out += ",\"covered_cells\":" + std::to_string(trace.covered_cells) + ",\"r\":" + std::to_string(trace.rows) +
         ",\"c\":" + std::to_string(trace.cols) + "}\n";
  return out;
}

std::array<std::uint8_t, 3> bullet_color(double radius) {
  if (radius < 4.0) return {255, 96, 96};
  if (radius < 7.0) return {255, 200, 64};
  if (radius < 10.0) return {96, 200, 255};
  if (radius < 13.0) return {160, 120, 255};
  return {240, 240, 240};
}

FrameImage render_frame(std::span<const BulletSnapshot> bullets, const SimConfig& config) {
  FrameImage img;
  img.width = config.screen_w;
  img.height = config.screen_h;
  img.rgb.resize(static_cast<std::size_t>(img.width) * img.height * 3);
  for (std::size_t i = 0; i < img.rgb.size(); i += 3) std::copy_n(kBackground, 3, &img.rgb[i]);
  for (const auto& b : bullets) {
    const auto color = bullet_color(b.radius);
    const int x0 = std::max(0, static_cast<int>(std::floor(b.x - b.radius)));
    const int x1 = std::min(img.width - 1, static_cast<int>(std::ceil(b.x + b.radius)));
    const int y0 = std::max(0, static_cast<int>(std::floor(b.y - b.radius)));
    const int y1 = std::min(img.height - 1, static_cast<int>(std::ceil(b.y + b.radius)));
    const double r2 = b.radius * b.radius;
    for (int py = y0; py <= y1; ++py) {
      for (int px = x0; px <= x1; ++px) {
        const double dx = px + 0.5 - b.x, dy = py + 0.5 - b.y;
        if (dx * dx + dy * dy > r2) continue;
        std::copy(color.begin(), color.end(), &img.rgb[(static_cast<std::size_t>(py) * img.width + px) * 3]);
      }
    }
  }
  return img;
}

std::string encode_ppm(const FrameImage& image) {
  std::string out = "P6\n" + std::to_string(image.width) + " " + std::to_string(image.height) + "\n255\n";
  out.append(reinterpret_cast<const char*>(image.rgb.data()), image.rgb.size());
  return out;
}

std::vector<std::filesystem::path> render_frames(const SimTrace& trace, int stride, const std::filesystem::path& out_dir,
                                                 const SimConfig& config) {
  if (stride < 1) throw ValidationError("render: stride must be at least 1");
  if (static_cast<int>(trace.frames.size()) != trace.t_total) {
    throw ValidationError("render: trace was simulated without snapshots");
  }
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) throw IoError("render: cannot create " + out_dir.string() + ": " + ec.message());
  std::vector<std::filesystem::path> written;
  for (int f = 0; f < trace.t_total; f += stride) {
    char name[32];
    std::snprintf(name, sizeof(name), "frame_%05d.ppm", f);
    const auto path = out_dir / name;
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("render: cannot write " + path.string());
    out << encode_ppm(render_frame(trace.frames[static_cast<std::size_t>(f)], config));
    if (!out) throw IoError("render: write failed for " + path.string());
    written.push_back(path);
  }
  return written;
}

}  // namespace danmaku
