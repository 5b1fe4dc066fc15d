#pragma once

#include "plume/common.hpp"
#include "plume/sim.hpp"

#include <array>
#include <optional>
#include <string_view>

namespace plume::rl {

inline constexpr int kNumActions = 7;

enum Action : int { Up = 0, HardLeft = 1, Left = 2, None = 3, Right = 4, HardRight = 5, Down = 6 };

std::string_view action_name(int action);

/// Seven velocity presets; every row flies forward at v_forward.
struct ActionTable {
  double v_forward = 1.0;
  double v_lat = 0.5;
  double v_vert = 0.5;
  double m = 2.0;  // multiplier for the hard lateral actions

  void validate() const;
};

/// Throws std::out_of_range for ids outside [0, 6].
sim::VelocityCommand action_to_command(int action, const ActionTable& table);

/// Seven image regions symmetric about the image centre. Vertical bands at
/// f1 < f2 < f3 < f4 (fractions of width); the centre column is split at
/// g1 < g2 (fractions of height). Region ids equal the matching action ids.
struct RegionPartition {
  double f1 = 0.2, f2 = 0.4, f3 = 0.6, f4 = 0.8;
  double g1 = 0.4, g2 = 0.6;

  void validate() const;
};

int region_of(const Vec2& centroid, const RegionPartition& partition, int width, int height);

struct RewardScheme {
  double match = 1.0;
  double mismatch = -0.5;
  double lost = -1.0;
};

double reward(const std::optional<Vec2>& centroid, int pred, const RegionPartition& partition, int width,
              int height, const RewardScheme& scheme = {});

}  // namespace plume::rl
