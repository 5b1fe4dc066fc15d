#include "plume/mission.hpp"

#include "plume/rl/ppo.hpp"

#include <algorithm>
#include <array>
#include <cmath>

namespace plume::mission {

namespace {

constexpr std::array<std::string_view, 8> kPhaseNames{"Hover",      "Detecting", "FlowEstimating", "YawAligning",
                                                      "Descending", "InPlume",   "Lost",           "Done"};

int ticks_per_event(double rate, double dt, const char* name) {
  if (!(rate > 0.0)) throw ConfigError(std::string("mission: ") + name + " must be positive");
  const double n = 1.0 / (rate * dt);
  const double r = std::round(n);
  if (r < 1.0 || std::abs(n - r) > 1e-9 * r)
    throw ConfigError(std::string("mission: ") + name + " must divide the simulation tick rate");
  return static_cast<int>(r);
}

bool tracking(Phase p) {
  return p == Phase::FlowEstimating || p == Phase::YawAligning || p == Phase::Descending || p == Phase::InPlume;
}

}  // namespace

std::string_view to_string(Phase p) { return kPhaseNames[static_cast<std::size_t>(p)]; }

std::optional<Phase> parse_phase(std::string_view name) {
  for (std::size_t i = 0; i < kPhaseNames.size(); ++i)
    if (kPhaseNames[i] == name) return static_cast<Phase>(i);
  return std::nullopt;
}

std::string_view to_string(ControllerKind c) { return c == ControllerKind::pid ? "pid" : "drl"; }

std::optional<ControllerKind> parse_controller(std::string_view name) {
  if (name == "pid") return ControllerKind::pid;
  if (name == "drl") return ControllerKind::drl;
  return std::nullopt;
}

void MissionConfig::validate(double dt) const {
  ticks_per_event(rate_seg, dt, "rate_seg");
  ticks_per_event(rate_policy, dt, "rate_policy");
  ticks_per_event(rate_cmd, dt, "rate_cmd");
  camera.validate();
  if (!(rho_down > 0.0 && rho_forward > 0.0)) throw ConfigError("mission: image thresholds must be positive");
  if (flow_min_samples < 2 || flow_k_max < 1) throw ConfigError("mission: flow window too small");
  if (!(lost_timeout > 0.0)) throw ConfigError("mission: lost_timeout must be positive");
  if (!(altitude_floor >= 0.0)) throw ConfigError("mission: altitude_floor must be non-negative");
}

double yaw_against_flow(const Vec2& f) { return wrap_angle(std::atan2(f.x(), -f.y())); }

Vec2 image_to_enu(const Vec2& d, double yaw) {
  // Nadir image: x is body right, -y is body forward.
  const Vec3 v = d.x() * sim::right_axis(yaw) - d.y() * sim::forward_axis(yaw);
  return {v.x(), v.y()};
}

void init_drone(sim::World& world, const MissionConfig& cfg, std::uint64_t seed) {
  Rng rng = make_rng(seed, "start");
  std::uniform_real_distribution<double> jitter(-cfg.start_jitter, cfg.start_jitter);
  std::uniform_real_distribution<double> heading(-kPi, kPi);
  sim::DroneState& d = world.drone();
  const Vec3 src = world.physics().source;
  const double east = jitter(rng);
  const double north = cfg.start_north + jitter(rng);
  d.position = Vec3{src.x() + east, src.y() + north, cfg.start_altitude};
  d.velocity.setZero();
  d.yaw = wrap_angle(heading(rng));
  d.gimbal = sim::CameraMount::down;
}

Mission::Mission(const MissionConfig& cfg, const sim::PhysicsConfig& physics, const rl::PolicySnapshot* policy)
    : cfg_(cfg), physics_(physics), policy_(policy) {
  cfg_.validate(physics_.dt);
  if (cfg_.controller == ControllerKind::drl && !policy_) throw ConfigError("mission: drl controller needs a policy");
  seg_every_ = ticks_per_event(cfg_.rate_seg, physics_.dt, "rate_seg");
  policy_every_ = ticks_per_event(cfg_.rate_policy, physics_.dt, "rate_policy");
  cmd_every_ = ticks_per_event(cfg_.rate_cmd, physics_.dt, "rate_cmd");
  decision_dt_ = 1.0 / cfg_.rate_policy;
}

sensor::CameraModel Mission::active_camera(sim::CameraMount mount) const {
  sensor::CameraModel cam = cfg_.camera;
  cam.mount = mount;
  if (cfg_.controller == ControllerKind::drl && phase_ == Phase::InPlume)
    cam = cam.resized(policy_->spec.width, policy_->spec.height);
  return cam;
}

void Mission::enter(Phase p, double t) {
  phase_ = p;
  phase_since_ = t;
  switch (p) {
    case Phase::Detecting:
    case Phase::Lost:
      gimbal_ = sim::CameraMount::down;
      break;
    case Phase::FlowEstimating:
      flow_window_.clear();
      if (summary_.valid && summary_.mount == sim::CameraMount::down) flow_window_.push_back(mask_);
      break;
    case Phase::Descending:
      lat_ = {cfg_.descent_lateral, {}};
      lon_ = {cfg_.descent_longitudinal, {}};
      sweep_dir_ = -1.0;
      break;
    case Phase::InPlume:
      lat_ = {cfg_.inplume_lateral, {}};
      vert_ = {cfg_.inplume_vertical, {}};
      gimbal_ = sim::CameraMount::forward;
      break;
    default:
      break;
  }
}

void Mission::sense(const sim::World& world, double t) {
  const sensor::CameraModel cam = active_camera(gimbal_);
  sim::DroneState view = world.drone();
  view.gimbal = gimbal_;
  const double rho = gimbal_ == sim::CameraMount::down ? cfg_.rho_down : cfg_.rho_forward;
  mask_ = sensor::render_mask(world.plume(), view, cam, rho);
  const auto s = mask_.stats(sensor::area_threshold(cam.width, cam.height, cfg_.area_min_frac));
  summary_ = MaskSummary{s.area, s.centroid, s.bbox, s.valid, gimbal_};
  if (s.valid) last_valid_t_ = t;
  if (phase_ == Phase::FlowEstimating && gimbal_ == sim::CameraMount::down) flow_window_.push_back(mask_);
}

void Mission::decide(const sim::World& world, double t, TickRecord& rec) {
  const sim::DroneState& d = world.drone();
  const double since = last_valid_t_ ? t - *last_valid_t_ : 0.0;
  const double target_alt = physics_.source.z() + cfg_.target_altitude_offset;
  sim::VelocityCommand cmd;

  if (tracking(phase_) && last_valid_t_ && since >= cfg_.lost_timeout) enter(Phase::Lost, t);

  auto accept_flow = [&](const Vec2& f) {
    last_flow_ = f;
    rec.flow = f;
    yaw_target_ = yaw_against_flow(f);
    enter(Phase::YawAligning, t);
  };

  switch (phase_) {
    case Phase::Hover:
      if (t >= cfg_.arm_delay) enter(Phase::Detecting, t);
      break;
    case Phase::Detecting:
      if (summary_.valid && summary_.mount == sim::CameraMount::down) enter(Phase::FlowEstimating, t);
      break;
    case Phase::FlowEstimating: {
      // A steady plume in view only shows its sideways sway, so after a
      // reacquisition the heading from the first estimate is kept.
      if (last_flow_) {
        accept_flow(*last_flow_);
        break;
      }
      if (static_cast<int>(flow_window_.size()) < cfg_.flow_min_samples) break;
      const auto est = sensor::estimate_flow(flow_window_, cfg_.flow_eps_var, cfg_.flow_k_max);
      if (est && est->circular_variance < cfg_.flow_eps_var) {
        accept_flow(image_to_enu(est->direction, d.yaw));
      } else if (static_cast<int>(flow_window_.size()) > cfg_.flow_k_max) {
        flow_window_.clear();
      }
      break;
    }
    case Phase::YawAligning: {
      const double err = wrap_angle(*yaw_target_ - d.yaw);
      if (std::abs(err) < cfg_.yaw_tolerance_deg * kPi / 180.0)
        enter(Phase::Descending, t);
      else
        cmd.yaw_rate = cfg_.yaw_gain * err;
      break;
    }
    case Phase::Descending: {
      if (d.position.z() <= target_alt && rec.inside) {
        enter(Phase::InPlume, t);
        cmd.vx = cfg_.controller == ControllerKind::drl ? policy_->actions.v_forward : cfg_.v_forward;
        break;
      }
      const auto cam = active_camera(sim::CameraMount::down);
      const auto sc = control::descent_command(summary_.valid ? summary_.bbox : std::nullopt, cam, lat_, lon_,
                                               cfg_.v_descend, decision_dt_);
      cmd = sc.cmd;
      if (d.position.z() <= target_alt) {
        // Below the target altitude without being inside: sweep vertically.
        if (d.position.z() <= cfg_.altitude_floor) sweep_dir_ = 1.0;
        if (sweep_dir_ > 0.0 && d.position.z() >= target_alt) sweep_dir_ = -1.0;
        cmd.vz = sweep_dir_ * cfg_.v_sweep;
      }
      break;
    }
    case Phase::InPlume: {
      const Vec3 rel = d.position - physics_.source;
      if (std::hypot(rel.x(), rel.y()) < cfg_.source_radius) {
        enter(Phase::Done, t);
        break;
      }
      const std::optional<Vec2> c = summary_.valid ? summary_.centroid : std::nullopt;
      if (cfg_.controller == ControllerKind::pid) {
        const auto cam = active_camera(sim::CameraMount::forward);
        cmd = control::inplume_command(c, cam, lat_, vert_, cfg_.v_forward, decision_dt_).cmd;
      } else {
        try {
          const int a = rl::infer(policy_->spec, policy_->params, mask_);
          rec.action = a;
          rec.reward = rl::reward(c, a, policy_->partition, mask_.width(), mask_.height());
          cmd = rl::action_to_command(a, policy_->actions);
        } catch (const std::exception&) {
          enter(Phase::Lost, t);
          cmd = {};
        }
      }
      break;
    }
    case Phase::Lost:
      if (summary_.valid && summary_.mount == sim::CameraMount::down) {
        enter(Phase::Detecting, t);
      } else if (t - phase_since_ >= cfg_.lost_abort) {
        enter(Phase::Done, t);
      } else if (d.position.z() < cfg_.lost_ceiling) {
        cmd.vz = cfg_.v_climb;
      }
      break;
    case Phase::Done:
      break;
  }
  rec.since_valid = since;
  decision_ = cmd.clamped(physics_.drone.v_clamp, physics_.drone.yaw_rate_clamp);
}

TickRecord Mission::step(sim::World& world) {
  const double t = static_cast<double>(tick_) * physics_.dt;
  TickRecord rec;
  rec.tick = tick_;
  rec.t = t;
  rec.inside = sim::is_inside(world.plume(), world.drone().position, physics_.rho_in);
  rec.sensed = tick_ % seg_every_ == 0;
  rec.decided = tick_ % policy_every_ == 0;
  rec.dispatched = tick_ % cmd_every_ == 0;

  if (rec.sensed) sense(world, t);
  if (rec.decided) decide(world, t, rec);
  if (rec.dispatched) held_ = decision_;

  world.drone().gimbal = gimbal_;
  rec.drone = world.drone();
  rec.phase = phase_;
  rec.command = held_;
  rec.mask = summary_;
  rec.yaw_target = yaw_target_;
  if (!rec.decided) rec.since_valid = last_valid_t_ ? t - *last_valid_t_ : 0.0;

  world.step(held_);
  ++tick_;
  return rec;
}

EpisodeLog run_episode(const sim::WindScenario& scenario, const MissionConfig& cfg, const sim::PhysicsConfig& physics,
                       std::uint64_t seed, double duration, const rl::PolicySnapshot* policy) {
  EpisodeLog log;
  log.info.scenario = scenario.normalized();
  log.info.controller = cfg.controller;
  log.info.seed = seed;
  log.info.duration = duration;

  sim::World world(scenario, physics, seed);
  init_drone(world, cfg, seed);
  Mission mission(cfg, physics, policy);
  const long ticks = std::max(0L, static_cast<long>(std::llround(duration / physics.dt)));
  log.records.reserve(static_cast<std::size_t>(ticks));
  for (long k = 0; k < ticks; ++k) {
    log.records.push_back(mission.step(world));
    if (mission.finished()) break;
  }
  return log;
}

std::optional<std::size_t> first_inplume(const EpisodeLog& log) {
  for (std::size_t i = 0; i < log.records.size(); ++i)
    if (log.records[i].phase == Phase::InPlume) return i;
  return std::nullopt;
}

}  // namespace plume::mission
