#include "danmaku/agent.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "danmaku/error.hpp"

namespace danmaku {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

/// (frames survived, min clearance) compared lexicographically.
struct Score {
  int depth = 0;
  double clear = kInf;

  bool better_than(const Score& o) const { return depth != o.depth ? depth > o.depth : clear > o.clear; }
};

/// Bullets of one frame bucketed around the player, limited to those that
/// can influence a capped clearance anywhere within `reach` of the player.
class LocalField {
 public:
  LocalField(std::span<const BulletSnapshot> bullets, Player centre, double reach, const AgentConfig& config)
      : config_(config) {
    double max_r = 0.0;
    for (const auto& b : bullets) max_r = std::max(max_r, b.radius);
    range_ = config.clearance_cap + config.hit_radius + max_r;
    cell_ = std::max(range_, 1.0);
    x0_ = centre.x - reach - range_;
    y0_ = centre.y - reach - range_;
    n_ = static_cast<int>(std::ceil(2.0 * (reach + range_) / cell_)) + 1;
    cells_.resize(static_cast<std::size_t>(n_ * n_));
    for (const auto& b : bullets) {
      const int cx = static_cast<int>(std::floor((b.x - x0_) / cell_));
      const int cy = static_cast<int>(std::floor((b.y - y0_) / cell_));
      if (cx < 0 || cy < 0 || cx >= n_ || cy >= n_) continue;
      cells_[static_cast<std::size_t>(cy * n_ + cx)].push_back(b);
    }
  }

  double clearance(Player p) const {
    double best = config_.clearance_cap;
    const int cx = static_cast<int>(std::floor((p.x - x0_) / cell_));
    const int cy = static_cast<int>(std::floor((p.y - y0_) / cell_));
    for (int y = std::max(0, cy - 1); y <= std::min(n_ - 1, cy + 1); ++y) {
      for (int x = std::max(0, cx - 1); x <= std::min(n_ - 1, cx + 1); ++x) {
        for (const auto& b : cells_[static_cast<std::size_t>(y * n_ + x)]) {
          const double c = std::hypot(p.x - b.x, p.y - b.y) - b.radius - config_.hit_radius;
          best = std::min(best, c);
        }
      }
    }
    return best;
  }

 private:
  const AgentConfig& config_;
  double range_ = 0.0, cell_ = 1.0, x0_ = 0.0, y0_ = 0.0;
  int n_ = 1;
  std::vector<std::vector<BulletSnapshot>> cells_;
};

}  // namespace

void AgentConfig::validate() const {
  if (horizon < 1) throw ValidationError("agent: horizon must be at least 1");
  if (!(speed > 0.0)) throw ValidationError("agent: speed must be positive");
  if (!(hit_radius >= 0.0)) throw ValidationError("agent: hit radius must be non-negative");
  if (!(clearance_cap > 0.0)) throw ValidationError("agent: clearance cap must be positive");
  if (start_x < 0.0 || start_x > screen_w || start_y < 0.0 || start_y > screen_h) {
    throw ValidationError("agent: start position is off screen");
  }
}

std::string_view action_name(Action a) {
  static constexpr std::array<std::string_view, kActionCount> names = {"stay", "n",  "ne", "e", "se",
                                                                       "s",    "sw", "w",  "nw"};
  return names[static_cast<std::size_t>(a)];
}

Player apply(Player p, Action a, const AgentConfig& config) {
  const auto& s = kActionSteps[static_cast<std::size_t>(a)];
  return {p.x + s[0] * config.speed, p.y + s[1] * config.speed};
}

bool in_bounds(Player p, const AgentConfig& config) {
  return p.x >= 0.0 && p.x <= config.screen_w && p.y >= 0.0 && p.y <= config.screen_h;
}

double clearance(Player p, std::span<const BulletSnapshot> bullets, const AgentConfig& config) {
  double best = config.clearance_cap;
  for (const auto& b : bullets) best = std::min(best, std::hypot(p.x - b.x, p.y - b.y) - b.radius - config.hit_radius);
  return best;
}

Action plan_step(Player player, std::size_t frame, const SimTrace& trace, const AgentConfig& config) {
  config.validate();
  if (trace.frames.size() != static_cast<std::size_t>(trace.t_total)) {
    throw ValidationError("agent: trace has no bullet snapshots");
  }
  const std::size_t available = frame + 1 < trace.frames.size() ? trace.frames.size() - frame - 1 : 0;
  const int H = static_cast<int>(std::min<std::size_t>(static_cast<std::size_t>(config.horizon), available));
  if (H == 0) return Action::stay;

  // Backward induction over the lattice of positions reachable in k moves:
  // V_k(q) is the best score of any continuation standing at q after move k.
  // Because the score of a path is a lexicographic (depth, prefix minimum),
  // max over continuations commutes with taking the minimum with c_k(q), so
  // this is exactly the exhaustive tree search.
  const int side = 2 * H + 1;
  auto at = [side, H](int i, int j) { return static_cast<std::size_t>((j + H) * side + (i + H)); };
  std::vector<Score> next(static_cast<std::size_t>(side * side));
  std::vector<Score> cur(next.size());
  for (int k = H; k >= 1; --k) {
    const LocalField field(trace.frames[frame + static_cast<std::size_t>(k)], player, k * config.speed, config);
    for (int j = -k; j <= k; ++j) {
      for (int i = -k; i <= k; ++i) {
        const Player q{player.x + i * config.speed, player.y + j * config.speed};
        if (!in_bounds(q, config)) continue;
        const double c = std::min(field.clearance(q), config.clearance_cap);
        Score s;
        if (c < 0.0) {
          s = {k - 1, kInf};
        } else if (k == H) {
          s = {H, c};
        } else {
          Score best{-1, -kInf};
          for (const auto& st : kActionSteps) {
            const Player r{q.x + st[0] * config.speed, q.y + st[1] * config.speed};
            if (!in_bounds(r, config)) continue;
            const Score& v = next[at(i + st[0], j + st[1])];
            if (v.better_than(best)) best = v;
          }
          s = {best.depth, std::min(c, best.clear)};
        }
        cur[at(i, j)] = s;
      }
    }
    std::swap(cur, next);
  }

  Action choice = Action::stay;
  Score best{-1, -kInf};
  for (std::size_t a = 0; a < kActionCount; ++a) {
    const Player q = apply(player, static_cast<Action>(a), config);
    if (!in_bounds(q, config)) continue;
    const Score& v = next[at(kActionSteps[a][0], kActionSteps[a][1])];
    if (v.better_than(best)) {
      best = v;
      choice = static_cast<Action>(a);
    }
  }
  return choice;
}

PlayabilityReport playability_on_trace(const SimTrace& trace, const AgentConfig& config) {
  config.validate();
  if (trace.frames.size() != static_cast<std::size_t>(trace.t_total)) {
    throw ValidationError("agent: trace has no bullet snapshots");
  }
  PlayabilityReport report;
  report.t_total = static_cast<std::size_t>(trace.t_total);
  report.survived_frames = report.t_total;
  Player p{config.start_x, config.start_y};
  AgentConfig uncapped = config;
  uncapped.clearance_cap = kInf;
  for (std::size_t f = 0; f < report.t_total; ++f) {
    report.path.push_back(p);
    const auto& bullets = trace.frames[f];
    if (!bullets.empty()) {
      const double c = clearance(p, bullets, uncapped);
      report.min_clearance = report.min_clearance ? std::min(*report.min_clearance, c) : c;
      if (c < 0.0) {
        report.collided = true;
        report.survived_frames = f;
        break;
      }
    }
    if (f + 1 < report.t_total) p = apply(p, plan_step(p, f, trace, config), config);
  }
  report.survival_ratio =
      report.t_total == 0 ? 1.0 : static_cast<double>(report.survived_frames) / static_cast<double>(report.t_total);
  return report;
}

PlayabilityReport playability(const ParametricSequence& seq, const AgentConfig& config, const SimConfig& sim) {
  SimConfig c = sim;
  c.record_snapshots = true;
  return playability_on_trace(run(seq, c), config);
}

std::string report_to_json(const PlayabilityReport& report) {
  std::string out = "{\"survived_frames\":" + std::to_string(report.survived_frames) +
                    ",\"T_total\":" + std::to_string(report.t_total) +
                    ",\"survival_ratio\":" + format_double(report.survival_ratio) + ",\"min_clearance\":" +
                    (report.min_clearance ? format_double(*report.min_clearance) : std::string("null")) +
                    ",\"collided\":" + (report.collided ? "true" : "false") + "}\n";
  return out;
}

}  // namespace danmaku
