#include "plume/eval.hpp"

#include <cmath>

namespace plume::eval {

Observer make_observer(const config::RunConfig& cfg) {
  const auto& o = cfg.observer;
  const double dt = cfg.physics.dt;
  const double every = 1.0 / (o.sample_rate * dt);
  if (!(o.sample_rate > 0.0) || std::abs(every - std::round(every)) > 1e-9 || std::round(every) < 1.0)
    throw ConfigError("observer.sample_rate must divide the tick rate");

  Observer ob;
  ob.frame.origin = {o.ref_lat, o.ref_lon, 0.0};
  ob.sample_every = static_cast<int>(std::round(every));
  ob.rho_img = o.rho_img;
  const Vec3 eye{o.east, o.north, o.altitude};
  ob.pose.position = eye;
  ob.pose.yaw = 0.0;  // image up is north, image right is east
  ob.pose.gimbal = sim::CameraMount::down;
  ob.camera = {o.width, o.height, o.focal, sim::CameraMount::down, 1.0, 2.0 * o.altitude};
  ob.camera.validate();

  // Ground scale is taken at the source height, where the plume and the
  // tracking drone live.
  geo::ObserverCamera cam;
  cam.gps = ob.frame.to_gps(eye);
  cam.gps.alt = o.altitude - cfg.physics.source.z();
  cam.focal = o.focal;
  cam.width = o.width;
  cam.height = o.height;
  ob.georef = geo::georef_from_observer(cam);
  ob.source = ob.frame.to_gps(cfg.physics.source);
  return ob;
}

Scored score_episode(const mission::EpisodeLog& log, const config::RunConfig& cfg, const FrameSink& sink) {
  Scored out;
  const auto first = mission::first_inplume(log);
  if (!first) return out;

  const Observer ob = make_observer(cfg);
  metrics::MetricsAccumulator acc(ob.georef, ob.source, cfg.skeleton);
  sim::World world(log.info.scenario, cfg.physics, log.info.seed);
  const long first_tick = log.records[*first].tick;
  int sample = 0;
  for (const auto& rec : log.records) {
    if (rec.tick >= first_tick && (rec.tick - first_tick) % ob.sample_every == 0) {
      sensor::SegMask frame = sensor::render_mask(world.plume(), ob.pose, ob.camera, ob.rho_img);
      if (sink) sink(sample, rec.tick, frame);
      acc.add(ob.frame.to_gps(rec.drone.position), frame);
      out.last_frame = std::move(frame);
      ++sample;
    }
    world.step({});
  }
  out.report = acc.report();
  out.contour = acc.last_contour();
  out.skeleton = acc.last_skeleton();
  out.track = acc.track_px();
  return out;
}

config::RunConfig with_controller(const config::RunConfig& cfg, mission::ControllerKind controller) {
  config::RunConfig c = cfg;
  c.mission.controller = controller;
  return c;
}

mission::EpisodeLog run_mission(const config::RunConfig& cfg, sim::ScenarioKind scenario,
                                mission::ControllerKind controller, std::uint64_t seed, double duration,
                                const rl::PolicySnapshot* policy) {
  const config::RunConfig c = with_controller(cfg, controller);
  auto log = mission::run_episode(c.scenario(scenario), c.mission, c.physics, seed, duration, policy);
  log.info.config_hash = config::config_hash(c);
  return log;
}

}  // namespace plume::eval
