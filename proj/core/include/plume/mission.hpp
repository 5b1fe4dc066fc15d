#pragma once

#include "plume/pid.hpp"
#include "plume/rl/policy.hpp"
#include "plume/sensor.hpp"
#include "plume/sim.hpp"

#include <deque>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

// Two-phase flight orchestration: detect the plume from altitude, estimate
// its drift, turn into it, descend into it under PID, then track it from
// inside with either PID or a trained policy. All sub-loops are gated on the
// simulation tick, never on wall-clock time.
namespace plume::mission {

enum class Phase { Hover, Detecting, FlowEstimating, YawAligning, Descending, InPlume, Lost, Done };

std::string_view to_string(Phase p);
std::optional<Phase> parse_phase(std::string_view name);

enum class ControllerKind { pid, drl };

std::string_view to_string(ControllerKind c);
std::optional<ControllerKind> parse_controller(std::string_view name);

struct MissionConfig {
  double rate_seg = 30.0;     // Hz, sensing
  double rate_policy = 10.0;  // Hz, controller decisions
  double rate_cmd = 20.0;     // Hz, command dispatch
  double target_altitude_offset = 2.0;  // m above the source
  double lost_timeout = 3.0;            // s without a valid segment
  double lost_abort = 20.0;             // s spent in Lost before the episode ends
  double arm_delay = 0.5;               // s of hover before detection starts

  // Start pose, downwind of the source and above the plume.
  double start_north = 15.0;
  double start_altitude = 25.0;
  double start_jitter = 2.0;  // m, uniform +- on north/east

  sensor::CameraModel camera{320, 320, 160.0, sim::CameraMount::down, 1.0, 60.0};
  double rho_down = 2e-3;
  double rho_forward = 2e-2;
  double area_min_frac = 0.002;

  int flow_min_samples = 10;  // masks collected before estimating
  double flow_eps_var = 0.05;
  int flow_k_max = 30;

  double yaw_gain = 1.5;           // 1/s
  double yaw_tolerance_deg = 3.0;
  double v_descend = 1.0;
  double v_sweep = 0.5;            // vertical search speed below the target altitude
  double altitude_floor = 1.0;
  double v_climb = 1.0;            // while Lost
  double lost_ceiling = 25.0;      // m, climbing stops here
  double v_forward = 1.0;          // PID in-plume forward speed
  double source_radius = 5.0;      // m, horizontal; reaching it ends the mission

  control::PidGains descent_lateral;
  control::PidGains descent_longitudinal;
  control::PidGains inplume_lateral;
  control::PidGains inplume_vertical;

  ControllerKind controller = ControllerKind::pid;

  /// Throws ConfigError unless every rate divides the tick rate 1/dt.
  void validate(double dt) const;
};

/// Statistics of the most recent sensed mask as they were at decision time.
struct MaskSummary {
  long area = 0;
  std::optional<Vec2> centroid;
  std::optional<sensor::BBox> bbox;
  bool valid = false;
  sim::CameraMount mount = sim::CameraMount::down;
  bool operator==(const MaskSummary&) const = default;
};

/// State at the start of one simulation tick plus what the mission did in it.
struct TickRecord {
  long tick = 0;
  double t = 0.0;
  Phase phase = Phase::Hover;       // after this tick's decision
  sim::DroneState drone;            // at time t
  sim::VelocityCommand command;     // held by the vehicle over [t, t + dt)
  bool sensed = false;
  bool decided = false;
  bool dispatched = false;
  MaskSummary mask;
  std::optional<int> action;        // drl decisions
  std::optional<double> reward;     // drl decisions
  bool inside = false;              // truth density test at the drone position
  std::optional<double> yaw_target;
  std::optional<Vec2> flow;         // ENU (east, north) unit vector, set on the tick it was accepted
  double since_valid = 0.0;         // s since the last valid segment (0 before any)
  bool operator==(const TickRecord&) const = default;
};

/// Computes the yaw whose forward axis points against an ENU (east, north) flow.
double yaw_against_flow(const Vec2& flow_enu);

/// Rotates an image-plane direction of the nadir camera into ENU (east, north).
Vec2 image_to_enu(const Vec2& image_dir, double yaw);

/// Places the drone at its seeded start pose: hovering downwind, nadir gimbal.
void init_drone(sim::World& world, const MissionConfig& cfg, std::uint64_t seed);

class Mission {
 public:
  /// `policy` must outlive the mission and is required for the drl controller.
  Mission(const MissionConfig& cfg, const sim::PhysicsConfig& physics, const rl::PolicySnapshot* policy);

  /// Senses, decides and dispatches as the rate gates allow, advances the
  /// world by one tick and returns the record of that tick.
  TickRecord step(sim::World& world);

  Phase phase() const { return phase_; }
  bool finished() const { return phase_ == Phase::Done; }
  long tick() const { return tick_; }

 private:
  void sense(const sim::World& world, double t);
  void decide(const sim::World& world, double t, TickRecord& rec);
  void enter(Phase p, double t);
  sensor::CameraModel active_camera(sim::CameraMount mount) const;

  MissionConfig cfg_;
  sim::PhysicsConfig physics_;
  const rl::PolicySnapshot* policy_;
  int seg_every_ = 2, policy_every_ = 6, cmd_every_ = 3;
  double decision_dt_ = 0.1;

  long tick_ = 0;
  Phase phase_ = Phase::Hover;
  double phase_since_ = 0.0;
  sim::CameraMount gimbal_ = sim::CameraMount::down;
  sensor::SegMask mask_;
  MaskSummary summary_;
  std::optional<double> last_valid_t_;
  std::vector<sensor::SegMask> flow_window_;
  std::optional<Vec2> last_flow_;
  std::optional<double> yaw_target_;
  double sweep_dir_ = -1.0;
  control::AxisPid lat_, lon_, vert_;
  sim::VelocityCommand decision_;
  sim::VelocityCommand held_;
};

struct EpisodeInfo {
  sim::WindScenario scenario;
  ControllerKind controller = ControllerKind::pid;
  std::uint64_t seed = 0;
  double duration = 0.0;
  std::string config_hash;
};

struct EpisodeLog {
  EpisodeInfo info;
  std::vector<TickRecord> records;
  bool operator==(const EpisodeLog& o) const {
    return info.seed == o.info.seed && info.config_hash == o.info.config_hash && records == o.records;
  }
};

/// Runs one seeded episode until Done or the duration elapses.
EpisodeLog run_episode(const sim::WindScenario& scenario, const MissionConfig& cfg,
                       const sim::PhysicsConfig& physics, std::uint64_t seed, double duration,
                       const rl::PolicySnapshot* policy = nullptr);

/// Index of the first record in InPlume, if any.
std::optional<std::size_t> first_inplume(const EpisodeLog& log);

}  // namespace plume::mission
