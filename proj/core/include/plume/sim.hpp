#pragma once

#include "plume/common.hpp"
#include "plume/rng.hpp"

#include <optional>
#include <string_view>
#include <vector>

// World model: wind scenarios, Gaussian-puff plume transport, and point-mass
// drone kinematics.
//
// Frames: world is ENU anchored at the smoke source, with +North the
// streamwise wind direction, +East the crosswind axis and +Up vertical.
// Body frame is x forward, y right, z up. Yaw 0 points forward along +North;
// positive yaw turns forward toward +West (counterclockwise seen from above).
namespace plume::sim {

enum class ScenarioKind { S, UL, UH, U3D };

std::string_view to_string(ScenarioKind kind);
std::optional<ScenarioKind> parse_scenario(std::string_view name);

struct WindScenario {
  ScenarioKind kind = ScenarioKind::S;
  double v_base = 4.5;  // m/s, streamwise (+North)
  double amp_x = 0.0;   // m/s, crosswind (+East) amplitude
  double omega_x = 0.0; // rad/s
  double amp_z = 0.0;   // m/s, vertical amplitude
  double omega_z = 0.0; // rad/s

  /// Evaluation presets: steady, low/high-frequency crosswind, and 3D.
  static WindScenario preset(ScenarioKind kind);

  /// Returns a copy with the kind's structural invariants enforced
  /// (S has no fluctuation, UL/UH have no vertical component, no negatives).
  [[nodiscard]] WindScenario normalized() const;
};

/// (crosswind East, streamwise North, vertical Up) in m/s at time t >= 0.
Vec3 wind_at(const WindScenario& scenario, double t);

struct Puff {
  Vec3 center = Vec3::Zero();
  double sigma = 0.5;
  double age = 0.0;
  double strength = 1.0;
};

struct PlumeParams {
  double sigma0 = 0.5;          // m, initial puff spread
  double k_growth = 0.05;       // m/s, linear sigma growth
  double emit_interval = 0.2;   // s
  double strength = 1.0;
  double max_age = 60.0;        // s
  double jitter = 0.0;          // m/sqrt(s), per-puff random walk, 0 = off
};

struct PlumeState {
  std::vector<Puff> puffs;  // oldest first
  Vec3 source = Vec3::Zero();
  double emit_interval = 0.2;
  double t = 0.0;
  double since_emit = 0.0;
};

PlumeState make_plume(const Vec3& source, const PlumeParams& params);

/// One explicit-Euler transport step. `rng` is only drawn from when
/// params.jitter > 0.
PlumeState step_plume(const PlumeState& plume, const WindScenario& scenario,
                      const PlumeParams& params, double dt, Rng* rng = nullptr);

/// Concentration (1/m^3) as a sum of normalized isotropic Gaussians.
double plume_density(const PlumeState& plume, const Vec3& point);

/// Inclusive threshold test: density >= rho_in.
bool is_inside(const PlumeState& plume, const Vec3& point, double rho_in);

/// Puff centres from the source end (newest puff) to the tip (oldest puff).
std::vector<Vec3> mean_line(const PlumeState& plume);

enum class CameraMount { down, forward };

std::string_view to_string(CameraMount mount);

struct DroneState {
  Vec3 position = Vec3::Zero();
  Vec3 velocity = Vec3::Zero();
  double yaw = 0.0;
  CameraMount gimbal = CameraMount::down;
  bool operator==(const DroneState&) const = default;
};

struct VelocityCommand {
  double vx = 0.0;        // body forward
  double vy = 0.0;        // body right
  double vz = 0.0;        // up
  double yaw_rate = 0.0;  // rad/s, counterclockwise

  bool operator==(const VelocityCommand&) const = default;

  [[nodiscard]] VelocityCommand clamped(double v_max, double yaw_rate_max) const;
};

struct DroneParams {
  double tau = 0.3;           // s, velocity response time constant
  double v_clamp = 3.0;       // m/s, per-component command limit
  double yaw_rate_clamp = 1.0; // rad/s
};

/// Unit vector of body-forward in ENU for a given yaw.
Vec3 forward_axis(double yaw);
/// Unit vector of body-right in ENU for a given yaw.
Vec3 right_axis(double yaw);

/// Rotates a body-frame velocity command into ENU.
Vec3 body_to_enu(const VelocityCommand& cmd, double yaw);

DroneState step_drone(const DroneState& drone, const VelocityCommand& cmd,
                      const DroneParams& params, double dt);

struct PhysicsConfig {
  PlumeParams plume;
  DroneParams drone;
  Vec3 source{0.0, 0.0, 5.0};
  double dt = 1.0 / 60.0;
  double rho_in = 1e-3;
};

/// A plume, its wind scenario and one drone, advanced together at a fixed tick.
class World {
 public:
  World(const WindScenario& scenario, const PhysicsConfig& physics, std::uint64_t seed);

  /// Advances the plume alone (used to pre-develop a plume before a drone flies).
  void advance_plume(double duration);
  void step(const VelocityCommand& cmd);

  const PlumeState& plume() const { return plume_; }
  const DroneState& drone() const { return drone_; }
  DroneState& drone() { return drone_; }
  const WindScenario& scenario() const { return scenario_; }
  const PhysicsConfig& physics() const { return physics_; }
  double time() const { return plume_.t; }

 private:
  WindScenario scenario_;
  PhysicsConfig physics_;
  Rng rng_;
  PlumeState plume_;
  DroneState drone_;
};

}  // namespace plume::sim
