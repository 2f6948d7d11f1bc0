#pragma once

// Brute-force recomputation of the three metrics: bullets are stepped from
// their own spawn records and every one of the r x c cells is tested against
// every live bullet on every frame.

#include <algorithm>
#include <cmath>
#include <vector>

#include "danmaku/codec.hpp"
#include "danmaku/metrics.hpp"
#include "danmaku/rng.hpp"

namespace testing {

struct NaiveBullet {
  double x, y, angle, speed, accel, ang_vel, radius;
  bool alive = true;
};

inline bool naive_touch(double bx, double by, double r, double cell_x, double cell_y, double size) {
  const double half = size / 2.0;
  const double gx = std::max(0.0, std::abs(bx - (cell_x + half)) - half);
  const double gy = std::max(0.0, std::abs(by - (cell_y + half)) - half);
  return gx * gx + gy * gy < r * r;
}

inline danmaku::MetricsReport naive_metrics(const std::vector<danmaku::ShotEvent>& events,
                                            const danmaku::SimConfig& cfg) {
  const int rows = cfg.screen_h / cfg.cell_size, cols = cfg.screen_w / cfg.cell_size;
  std::vector<int> spawn_frame;
  int clock = 0;
  for (const auto& e : events) {
    clock += e.itv;
    spawn_frame.push_back(clock);
  }
  std::vector<NaiveBullet> bullets;
  std::vector<bool> covered(static_cast<std::size_t>(rows * cols), false);
  double momentum_total = 0.0;
  int frames = 0, spawned = 0;
  for (int f = 0; f < cfg.max_frames; ++f) {
    for (std::size_t i = 0; i < events.size(); ++i) {
      if (spawn_frame[i] != f) continue;
      const auto& e = events[i];
      bullets.push_back({cfg.emitter_x + e.spawn_dx, cfg.emitter_y + e.spawn_dy, e.angle, e.speed, e.accel, e.ang_vel,
                         e.radius});
      ++spawned;
    }
    double momentum = 0.0;
    for (const auto& b : bullets) {
      if (!b.alive) continue;
      momentum += (b.radius / 8.0) * b.speed;
      for (int r = 0; r < rows; ++r)
        for (int c = 0; c < cols; ++c)
          if (naive_touch(b.x, b.y, b.radius, c * cfg.cell_size, r * cfg.cell_size, cfg.cell_size))
            covered[static_cast<std::size_t>(r * cols + c)] = true;
    }
    momentum_total += momentum;
    frames = f + 1;
    bool any = false;
    for (auto& b : bullets) {
      if (!b.alive) continue;
      b.angle += b.ang_vel;
      b.speed = std::max(0.0, b.speed + b.accel);
      b.x += b.speed * std::cos(b.angle);
      b.y += b.speed * std::sin(b.angle);
      const double m = cfg.despawn_margin;
      b.alive = b.x > -m && b.x < cfg.screen_w + m && b.y > -m && b.y < cfg.screen_h + m;
      any = any || b.alive;
    }
    if (spawned == static_cast<int>(events.size()) && !any) break;
  }
  const int t_shoot = std::clamp(spawn_frame.empty() ? 0 : spawn_frame.back(), 1, frames);
  const auto n_cov = std::count(covered.begin(), covered.end(), true);
  return {static_cast<double>(events.size()) / t_shoot, momentum_total / frames,
          static_cast<double>(n_cov) / static_cast<double>(rows * cols)};
}

/// Up to three random bullets with short intervals; positions spread over
/// the whole screen so coverage edges are exercised.
inline std::vector<danmaku::ShotEvent> small_scenario(danmaku::Rng& rng) {
  std::vector<danmaku::ShotEvent> events(1 + rng.below(3));
  for (std::size_t i = 0; i < events.size(); ++i) {
    auto& e = events[i];
    e.itv = i == 0 ? 0 : static_cast<int>(rng.below(8));
    e.spawn_dx = rng.uniform(-64, 64);
    e.spawn_dy = rng.uniform(-64, 64);
    e.angle = rng.uniform(0, 6.28);
    e.speed = rng.uniform(0, 6);
    e.accel = rng.uniform(-0.1, 0.1);
    e.ang_vel = rng.uniform(-0.2, 0.2);
    e.radius = rng.uniform(2, 16);
  }
  return events;
}

}  // namespace testing
