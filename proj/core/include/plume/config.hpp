#pragma once

#include "plume/metrics.hpp"
#include "plume/mission.hpp"
#include "plume/nn/network.hpp"
#include "plume/rl/env.hpp"
#include "plume/rl/ppo.hpp"
#include "plume/sim.hpp"

#include <array>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>

namespace plume::config {

struct ObserverConfig {
  double ref_lat = 44.7303;   // deg, ENU origin
  double ref_lon = -93.0976;  // deg
  double east = 0.0;          // m, nadir point in ENU
  double north = 25.0;
  double altitude = 120.0;    // m above the ENU ground plane
  double focal = 440.0;       // px
  int width = 400;
  int height = 400;
  double rho_img = 1e-5;
  double sample_rate = 5.0;   // Hz, metric samples
};

struct TrainingEnvConfig {
  rl::ScenarioRandomization randomization;
  int lost_steps = 30;
  int max_steps = 600;
  double source_radius = 5.0;
  double spawn_min = 8.0;
  double spawn_max = 30.0;
  double spawn_lateral = 1.5;
  double spawn_vertical = 1.0;
  double spawn_yaw = 0.4;
  double spinup_min = 60.0;
  double spinup_max = 160.0;
};

struct RunConfig {
  std::string profile = "desk";
  std::array<sim::WindScenario, 4> scenarios{
      sim::WindScenario::preset(sim::ScenarioKind::S), sim::WindScenario::preset(sim::ScenarioKind::UL),
      sim::WindScenario::preset(sim::ScenarioKind::UH), sim::WindScenario::preset(sim::ScenarioKind::U3D)};
  sim::PhysicsConfig physics;
  mission::MissionConfig mission;
  rl::ActionTable actions;
  rl::RegionPartition partition;
  rl::RewardScheme rewards;
  nn::NetworkSpec network = nn::NetworkSpec::desk();
  rl::PpoConfig ppo;
  TrainingEnvConfig training;
  ObserverConfig observer;
  metrics::SkeletonParams skeleton;
  double eval_duration = 120.0;  // s per evaluation episode

  const sim::WindScenario& scenario(sim::ScenarioKind k) const { return scenarios[static_cast<std::size_t>(k)]; }
  /// Throws ConfigError on any inconsistent value.
  void validate() const;
};

/// Profile defaults: "desk" (64x64 masks, 2e5 steps) or "paper" (320x320,
/// trunk 512, 1e6 steps). Throws ConfigError for other names.
RunConfig default_config(std::string_view profile = "desk");

/// Canonical JSON (sorted keys, shortest round-trip numbers).
std::string to_json(const RunConfig& cfg);
/// Strict inverse of to_json: every key must be known and typed correctly.
RunConfig from_json(std::string_view json);

/// Reads a YAML file layered over the defaults of its profile. Unknown keys
/// and type mismatches raise ConfigError. `profile_override` wins over the
/// file's own profile key.
RunConfig load_config(const std::filesystem::path& path, const std::optional<std::string>& profile_override = {});

/// Same as load_config for in-memory YAML text.
RunConfig parse_config(std::string_view yaml, const std::optional<std::string>& profile_override = {});

/// SHA-256 of the canonical JSON, lowercase hex.
std::string config_hash(const RunConfig& cfg);

/// Environment used for policy training, consistent with the mission's
/// in-plume camera and decision rate.
rl::PlumeEnvConfig train_env_config(const RunConfig& cfg);

/// PLUME_PROFILE / PLUME_SEED, when set and non-empty.
std::optional<std::string> env_profile();
std::optional<std::uint64_t> env_seed();

}  // namespace plume::config
