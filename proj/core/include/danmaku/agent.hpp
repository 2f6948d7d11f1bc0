#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "danmaku/codec.hpp"
#include "danmaku/sim.hpp"

namespace danmaku {

struct AgentConfig {
  double speed = 4.0;
  double hit_radius = 3.0;
  int horizon = 30;
  double start_x = 192.0;
  double start_y = 400.0;
  /// Clearances above this are treated as equal while planning.
  double clearance_cap = 32.0;
  double screen_w = 384.0;
  double screen_h = 448.0;

  void validate() const;
};

enum class Action : int { stay = 0, n, ne, e, se, s, sw, w, nw };

inline constexpr std::size_t kActionCount = 9;
inline constexpr std::array<std::array<int, 2>, kActionCount> kActionSteps = {
    {{0, 0}, {0, -1}, {1, -1}, {1, 0}, {1, 1}, {0, 1}, {-1, 1}, {-1, 0}, {-1, -1}}};

std::string_view action_name(Action a);

struct Player {
  double x = 0.0;
  double y = 0.0;

  bool operator==(const Player&) const = default;
};

Player apply(Player p, Action a, const AgentConfig& config);
bool in_bounds(Player p, const AgentConfig& config);

/// Distance to the nearest bullet edge minus the hit radius, capped at
/// config.clearance_cap. Negative means a hit.
double clearance(Player p, std::span<const BulletSnapshot> bullets, const AgentConfig& config);

/// Chooses the move for `frame` -> `frame + 1`. Paths are scored by
/// (frames survived, minimum capped clearance along the path), compared
/// lexicographically; ties go to the lower action index, so stay wins when
/// nothing is in range. Moves leaving the screen are never considered. The
/// horizon is cut short at the end of the trace. Needs snapshots.
Action plan_step(Player player, std::size_t frame, const SimTrace& trace, const AgentConfig& config = {});

struct PlayabilityReport {
  std::size_t survived_frames = 0;
  std::size_t t_total = 0;
  double survival_ratio = 1.0;
  /// Uncapped minimum over frames with bullets on screen; empty if none.
  std::optional<double> min_clearance;
  bool collided = false;
  std::vector<Player> path;  ///< player position at each simulated frame
};

/// Runs the agent against a recorded trace (snapshots required). The player
/// is checked at every frame, starting at frame 0, and stops at the first hit.
PlayabilityReport playability_on_trace(const SimTrace& trace, const AgentConfig& config = {});

PlayabilityReport playability(const ParametricSequence& seq, const AgentConfig& config = {},
                              const SimConfig& sim = {});

std::string report_to_json(const PlayabilityReport& report);

}  // namespace danmaku
