#include "plume/rl/env.hpp"

#include <algorithm>
#include <cmath>

namespace plume::rl {

sim::WindScenario randomize_scenario(const std::array<sim::WindScenario, 4>& base,
                                     const ScenarioRandomization& r, Rng& rng) {
  std::uniform_int_distribution<int> pick(0, 3);
  sim::WindScenario s = base[static_cast<std::size_t>(pick(rng))];
  std::uniform_real_distribution<double> amp(1.0 - r.amp_jitter, 1.0 + r.amp_jitter);
  std::uniform_real_distribution<double> freq(1.0 - r.freq_jitter, 1.0 + r.freq_jitter);
  s.amp_x *= amp(rng);
  s.amp_z *= amp(rng);
  s.omega_x *= freq(rng);
  s.omega_z *= freq(rng);
  return s.normalized();
}

PlumeEnv::PlumeEnv(const PlumeEnvConfig& config, std::uint64_t seed)
    : config_(config), rng_(derive_seed(seed, "env")) {
  config_.camera.validate();
  config_.partition.validate();
  area_min_ = sensor::area_threshold(config_.camera.width, config_.camera.height, config_.area_min_frac);
  ticks_per_step_ = std::max(1, static_cast<int>(std::lround(config_.decision_dt / config_.physics.dt)));
  reset();
}

void PlumeEnv::reset() {
  const sim::WindScenario scenario = randomize_scenario(config_.scenarios, config_.randomization, rng_);
  world_ = std::make_unique<sim::World>(scenario, config_.physics, rng_());
  std::uniform_real_distribution<double> spin(config_.spinup_min, config_.spinup_max);
  world_->advance_plume(spin(rng_));

  std::uniform_real_distribution<double> dist(config_.spawn_min, config_.spawn_max);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  const double d = dist(rng_);
  const Vec3 source = world_->plume().source;
  Vec3 anchor = source + Vec3{0.0, d, 0.0};
  double best = 1e300;
  for (const sim::Puff& p : world_->plume().puffs) {
    const double e = std::abs(p.center.y() - source.y() - d);
    if (e < best) {
      best = e;
      anchor = p.center;
    }
  }
  sim::DroneState& drone = world_->drone();
  drone.position = anchor + Vec3{config_.spawn_lateral * unit(rng_), 0.0, config_.spawn_vertical * unit(rng_)};
  drone.position.z() = std::max(0.5, drone.position.z());
  drone.yaw = wrap_angle(kPi + config_.spawn_yaw * unit(rng_));
  drone.gimbal = sim::CameraMount::forward;
  drone.velocity = sim::forward_axis(drone.yaw) * config_.actions.v_forward;
  steps_ = 0;
  lost_ = 0;
  observe();
}

void PlumeEnv::observe() {
  obs_ = sensor::render_mask(world_->plume(), world_->drone(), config_.camera, config_.rho_img);
  const auto stats = obs_.stats(area_min_);
  centroid_ = stats.valid ? stats.centroid : std::nullopt;
}

StepOutcome PlumeEnv::step(int action) {
  StepOutcome out;
  out.reward = reward(centroid_, action, config_.partition, obs_.width(), obs_.height(), config_.rewards);
  const sim::VelocityCommand cmd = action_to_command(action, config_.actions);
  for (int i = 0; i < ticks_per_step_; ++i) world_->step(cmd);
  ++steps_;
  observe();
  lost_ = centroid_ ? 0 : lost_ + 1;

  const Vec3& pos = world_->drone().position;
  out.inside = sim::is_inside(world_->plume(), pos, config_.physics.rho_in);
  const Vec3 to_source = pos - world_->plume().source;
  const bool at_source = std::hypot(to_source.x(), to_source.y()) < config_.source_radius;
  out.done = at_source || lost_ >= config_.lost_steps || steps_ >= config_.max_steps;
  return out;
}

ToyRegionEnv::ToyRegionEnv(const ToyEnvConfig& config, std::uint64_t seed)
    : config_(config), rng_(derive_seed(seed, "toy-env")) {
  config_.partition.validate();
  reset();
}

sensor::SegMask ToyRegionEnv::draw(const ToyEnvConfig& c, Rng& rng) {
  const double W = c.width, H = c.height;
  const auto& p = c.partition;
  std::uniform_int_distribution<int> pick(0, kNumActions - 1);
  double x0 = 0, x1 = W - 1, y0 = 0, y1 = H - 1;
  switch (pick(rng)) {
    case Up: x0 = p.f2 * W; x1 = p.f3 * W; y1 = p.g1 * H; break;
    case HardLeft: x1 = p.f1 * W; break;
    case Left: x0 = p.f1 * W; x1 = p.f2 * W; break;
    case None: x0 = p.f2 * W; x1 = p.f3 * W; y0 = p.g1 * H; y1 = p.g2 * H; break;
    case Right: x0 = p.f3 * W; x1 = p.f4 * W; break;
    case HardRight: x0 = p.f4 * W; break;
    case Down: x0 = p.f2 * W; x1 = p.f3 * W; y0 = p.g2 * H; break;
  }
  std::uniform_real_distribution<double> ux(x0, x1), uy(y0, y1), ur(c.radius_min, c.radius_max);
  const double cx = ux(rng), cy = uy(rng), r = ur(rng);
  std::vector<std::uint8_t> bits(static_cast<std::size_t>(c.width) * c.height, 0);
  for (int y = 0; y < c.height; ++y)
    for (int x = 0; x < c.width; ++x)
      if ((x - cx) * (x - cx) + (y - cy) * (y - cy) <= r * r) bits[static_cast<std::size_t>(y) * c.width + x] = 1;
  return sensor::SegMask(c.width, c.height, std::move(bits));
}

void ToyRegionEnv::reset() {
  obs_ = draw(config_, rng_);
  target_ = obs_.centroid() ? region_of(*obs_.centroid(), config_.partition, obs_.width(), obs_.height()) : None;
}

StepOutcome ToyRegionEnv::step(int action) {
  StepOutcome out;
  out.reward = reward(obs_.centroid(), action, config_.partition, obs_.width(), obs_.height(), config_.rewards);
  out.done = true;
  reset();
  return out;
}

}  // namespace plume::rl
