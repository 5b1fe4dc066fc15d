#pragma once

#include "plume/rl/actions.hpp"
#include "plume/rng.hpp"
#include "plume/sensor.hpp"
#include "plume/sim.hpp"

#include <array>
#include <memory>
#include <optional>
#include <vector>

namespace plume::rl {

struct StepOutcome {
  double reward = 0.0;
  bool done = false;
  bool inside = false;  // drone inside the plume after the step (toy envs: false)
};

/// Gym-style environment whose observation is always a binary mask at the
/// policy input resolution.
class Environment {
 public:
  virtual ~Environment() = default;
  virtual void reset() = 0;
  virtual const sensor::SegMask& observation() const = 0;
  /// Rewards the action against the current observation, then advances.
  virtual StepOutcome step(int action) = 0;
};

/// Uniform +-jitter around each base scenario, applied at every reset.
struct ScenarioRandomization {
  double amp_jitter = 0.3;
  double freq_jitter = 0.5;
};

/// Draws a scenario kind uniformly and jitters its amplitudes/frequencies.
sim::WindScenario randomize_scenario(const std::array<sim::WindScenario, 4>& base,
                                     const ScenarioRandomization& r, Rng& rng);

struct PlumeEnvConfig {
  std::array<sim::WindScenario, 4> scenarios{
      sim::WindScenario::preset(sim::ScenarioKind::S), sim::WindScenario::preset(sim::ScenarioKind::UL),
      sim::WindScenario::preset(sim::ScenarioKind::UH), sim::WindScenario::preset(sim::ScenarioKind::U3D)};
  ScenarioRandomization randomization;
  sim::PhysicsConfig physics;
  sensor::CameraModel camera{64, 64, 32.0, sim::CameraMount::forward, 1.0, 60.0};
  double rho_img = 0.02;
  double area_min_frac = 0.002;
  ActionTable actions;
  RegionPartition partition;
  RewardScheme rewards;
  double decision_dt = 0.1;   // s per policy step
  int lost_steps = 30;
  double source_radius = 5.0; // m
  int max_steps = 600;
  double spawn_min = 8.0;     // m downwind of the source
  double spawn_max = 30.0;
  double spawn_lateral = 1.5; // m, uniform +- offset from the plume centre
  double spawn_vertical = 1.0;
  double spawn_yaw = 0.4;     // rad, uniform +- around facing the source
  double spinup_min = 60.0;   // s of plume development before the drone flies
  double spinup_max = 160.0;
};

/// In-plume tracking episodes over randomised wind: a drone spawned inside a
/// developed plume, facing the source, steered by the seven actions.
class PlumeEnv final : public Environment {
 public:
  PlumeEnv(const PlumeEnvConfig& config, std::uint64_t seed);

  void reset() override;
  const sensor::SegMask& observation() const override { return obs_; }
  StepOutcome step(int action) override;

  const sim::World& world() const { return *world_; }
  int steps() const { return steps_; }

 private:
  void observe();

  PlumeEnvConfig config_;
  Rng rng_;
  std::unique_ptr<sim::World> world_;
  sensor::SegMask obs_;
  std::optional<Vec2> centroid_;
  long area_min_ = 1;
  int steps_ = 0;
  int lost_ = 0;
  int ticks_per_step_ = 6;
};

struct ToyEnvConfig {
  int width = 64;
  int height = 64;
  double radius_min = 3.0;  // px
  double radius_max = 6.0;
  RegionPartition partition;
  RewardScheme rewards;
};

/// Single-step bandit episodes: one disc blob whose centroid is sampled
/// uniformly inside a uniformly chosen region.
class ToyRegionEnv final : public Environment {
 public:
  ToyRegionEnv(const ToyEnvConfig& config, std::uint64_t seed);

  void reset() override;
  const sensor::SegMask& observation() const override { return obs_; }
  StepOutcome step(int action) override;

  /// Region of the current observation's centroid (the optimal action).
  int target() const { return target_; }

  static sensor::SegMask draw(const ToyEnvConfig& config, Rng& rng);

 private:
  ToyEnvConfig config_;
  Rng rng_;
  sensor::SegMask obs_;
  int target_ = 0;
};

}  // namespace plume::rl
