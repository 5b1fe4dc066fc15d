#include "plume/sim.hpp"

#include <algorithm>
#include <cmath>

namespace plume::sim {

std::string_view to_string(ScenarioKind kind) {
  switch (kind) {
    case ScenarioKind::S: return "S";
    case ScenarioKind::UL: return "UL";
    case ScenarioKind::UH: return "UH";
    case ScenarioKind::U3D: return "U3D";
  }
  return "?";
}

std::optional<ScenarioKind> parse_scenario(std::string_view name) {
  if (name == "S") return ScenarioKind::S;
  if (name == "UL") return ScenarioKind::UL;
  if (name == "UH") return ScenarioKind::UH;
  if (name == "U3D") return ScenarioKind::U3D;
  return std::nullopt;
}

WindScenario WindScenario::preset(ScenarioKind kind) {
  WindScenario w;
  w.kind = kind;
  switch (kind) {
    case ScenarioKind::S:
      break;
    case ScenarioKind::UL:
      w.amp_x = 1.35;
      w.omega_x = 0.02 * kPi;
      break;
    case ScenarioKind::UH:
      w.amp_x = 1.95;
      w.omega_x = 0.04 * kPi;
      break;
    case ScenarioKind::U3D:
      w.amp_x = 1.95;
      w.omega_x = 0.04 * kPi;
      w.amp_z = 0.3;
      w.omega_z = 0.02 * kPi;
      break;
  }
  return w;
}

WindScenario WindScenario::normalized() const {
  WindScenario w = *this;
  w.amp_x = std::max(0.0, w.amp_x);
  w.amp_z = std::max(0.0, w.amp_z);
  w.omega_x = std::max(0.0, w.omega_x);
  w.omega_z = std::max(0.0, w.omega_z);
  if (w.kind == ScenarioKind::S) {
    w.amp_x = 0.0;
    w.amp_z = 0.0;
  }
  if (w.kind == ScenarioKind::UL || w.kind == ScenarioKind::UH) w.amp_z = 0.0;
  return w;
}

Vec3 wind_at(const WindScenario& s, double t) {
  return {s.amp_x * std::sin(s.omega_x * t), s.v_base, s.amp_z * std::sin(s.omega_z * t)};
}

PlumeState make_plume(const Vec3& source, const PlumeParams& params) {
  PlumeState p;
  p.source = source;
  p.emit_interval = params.emit_interval;
  return p;
}

PlumeState step_plume(const PlumeState& plume, const WindScenario& scenario,
                      const PlumeParams& params, double dt, Rng* rng) {
  PlumeState next = plume;
  const Vec3 shift = wind_at(scenario, plume.t) * dt;
  const bool jitter = params.jitter > 0.0 && rng != nullptr;
  std::normal_distribution<double> gauss(0.0, 1.0);
  const double jitter_scale = jitter ? params.jitter * std::sqrt(dt) : 0.0;

  for (Puff& puff : next.puffs) {
    puff.center += shift;
    if (jitter) {
      const double ex = gauss(*rng), ey = gauss(*rng), ez = gauss(*rng);
      puff.center += jitter_scale * Vec3{ex, ey, ez};
    }
    puff.sigma += params.k_growth * dt;
    puff.age += dt;
  }

  next.since_emit += dt;
  while (next.emit_interval > 0.0 && next.since_emit >= next.emit_interval) {
    next.since_emit -= next.emit_interval;
    // Back-date the puff to its true emission instant within this step.
    const double age = next.since_emit;
    next.puffs.push_back(Puff{next.source + wind_at(scenario, plume.t) * age,
                              params.sigma0 + params.k_growth * age, age, params.strength});
  }

  const auto first_young = std::find_if(next.puffs.begin(), next.puffs.end(),
                                        [&](const Puff& p) { return p.age <= params.max_age; });
  next.puffs.erase(next.puffs.begin(), first_young);
  next.t += dt;
  return next;
}

double plume_density(const PlumeState& plume, const Vec3& point) {
  static const double norm = std::pow(2.0 * kPi, -1.5);
  double rho = 0.0;
  for (const Puff& p : plume.puffs) {
    const double s2 = p.sigma * p.sigma;
    const double r2 = (point - p.center).squaredNorm();
    rho += p.strength * norm / (s2 * p.sigma) * std::exp(-r2 / (2.0 * s2));
  }
  return rho;
}

bool is_inside(const PlumeState& plume, const Vec3& point, double rho_in) {
  return plume_density(plume, point) >= rho_in;
}

std::vector<Vec3> mean_line(const PlumeState& plume) {
  std::vector<Vec3> line;
  line.reserve(plume.puffs.size());
  for (auto it = plume.puffs.rbegin(); it != plume.puffs.rend(); ++it) line.push_back(it->center);
  return line;
}

std::string_view to_string(CameraMount mount) {
  return mount == CameraMount::down ? "down" : "forward";
}

VelocityCommand VelocityCommand::clamped(double v_max, double yaw_rate_max) const {
  return {std::clamp(vx, -v_max, v_max), std::clamp(vy, -v_max, v_max),
          std::clamp(vz, -v_max, v_max), std::clamp(yaw_rate, -yaw_rate_max, yaw_rate_max)};
}

Vec3 forward_axis(double yaw) { return {-std::sin(yaw), std::cos(yaw), 0.0}; }

Vec3 right_axis(double yaw) { return {std::cos(yaw), std::sin(yaw), 0.0}; }

Vec3 body_to_enu(const VelocityCommand& cmd, double yaw) {
  return cmd.vx * forward_axis(yaw) + cmd.vy * right_axis(yaw) + Vec3{0.0, 0.0, cmd.vz};
}

DroneState step_drone(const DroneState& drone, const VelocityCommand& cmd,
                      const DroneParams& params, double dt) {
  const VelocityCommand c = cmd.clamped(params.v_clamp, params.yaw_rate_clamp);
  DroneState next = drone;
  const double gain = params.tau > 0.0 ? std::min(1.0, dt / params.tau) : 1.0;
  next.velocity += (body_to_enu(c, drone.yaw) - drone.velocity) * gain;
  next.position += next.velocity * dt;
  if (next.position.z() < 0.0) {
    next.position.z() = 0.0;
    next.velocity.z() = std::max(0.0, next.velocity.z());
  }
  next.yaw = wrap_angle(drone.yaw + c.yaw_rate * dt);
  return next;
}

World::World(const WindScenario& scenario, const PhysicsConfig& physics, std::uint64_t seed)
    : scenario_(scenario.normalized()),
      physics_(physics),
      rng_(derive_seed(seed, "world")),
      plume_(make_plume(physics.source, physics.plume)) {}

void World::advance_plume(double duration) {
  const auto ticks = static_cast<long>(std::llround(duration / physics_.dt));
  for (long i = 0; i < ticks; ++i)
    plume_ = step_plume(plume_, scenario_, physics_.plume, physics_.dt, &rng_);
}

void World::step(const VelocityCommand& cmd) {
  plume_ = step_plume(plume_, scenario_, physics_.plume, physics_.dt, &rng_);
  drone_ = step_drone(drone_, cmd, physics_.drone, physics_.dt);
}

}  // namespace plume::sim
