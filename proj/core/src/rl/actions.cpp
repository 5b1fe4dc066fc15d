#include "plume/rl/actions.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace plume::rl {

std::string_view action_name(int action) {
  static constexpr std::array<std::string_view, kNumActions> names{
      "up", "hard-left", "left", "none", "right", "hard-right", "down"};
  if (action < 0 || action >= kNumActions) return "invalid";
  return names[static_cast<std::size_t>(action)];
}

void ActionTable::validate() const {
  if (v_lat < 0 || v_vert < 0) throw ConfigError("action table: velocities must be non-negative");
  if (!(m > 1.0)) throw ConfigError("action table: multiplier m must exceed 1");
}

sim::VelocityCommand action_to_command(int action, const ActionTable& t) {
  sim::VelocityCommand c;
  c.vx = t.v_forward;
  switch (action) {
    case Up: c.vz = t.v_vert; break;
    case HardLeft: c.vy = -t.m * t.v_lat; break;
    case Left: c.vy = -t.v_lat; break;
    case None: break;
    case Right: c.vy = t.v_lat; break;
    case HardRight: c.vy = t.m * t.v_lat; break;
    case Down: c.vz = -t.v_vert; break;
    default: throw std::out_of_range("action id " + std::to_string(action) + " outside [0, 6]");
  }
  return c;
}

void RegionPartition::validate() const {
  constexpr double tol = 1e-12;
  if (!(0.0 < f1 && f1 < f2 && f2 < f3 && f3 < f4 && f4 < 1.0) || !(0.0 < g1 && g1 < g2 && g2 < 1.0))
    throw ConfigError("region partition: fractions must be strictly increasing inside (0, 1)");
  if (std::abs(f1 + f4 - 1.0) > tol || std::abs(f2 + f3 - 1.0) > tol || std::abs(g1 + g2 - 1.0) > tol)
    throw ConfigError("region partition must be symmetric about the image centre");
}

int region_of(const Vec2& c, const RegionPartition& p, int width, int height) {
  const double x = c.x(), y = c.y();
  if (x < p.f1 * width) return HardLeft;
  if (x < p.f2 * width) return Left;
  if (x > p.f4 * width) return HardRight;
  if (x > p.f3 * width) return Right;
  if (y < p.g1 * height) return Up;
  if (y > p.g2 * height) return Down;
  return None;
}

double reward(const std::optional<Vec2>& centroid, int pred, const RegionPartition& partition, int width,
              int height, const RewardScheme& scheme) {
  if (!centroid) return scheme.lost;
  return region_of(*centroid, partition, width, height) == pred ? scheme.match : scheme.mismatch;
}

}  // namespace plume::rl
