#pragma once

#include "plume/config.hpp"
#include "plume/geo.hpp"
#include "plume/metrics.hpp"
#include "plume/mission.hpp"

#include <functional>
#include <optional>

// Scoring of an episode from its log alone: the plume is re-simulated from
// the logged scenario, physics and seed, viewed by a fixed nadir observer,
// and compared against the logged drone track.
namespace plume::eval {

struct Observer {
  geo::LocalFrame frame;
  geo::GeoRef georef;
  sensor::CameraModel camera;
  sim::DroneState pose;
  double rho_img = 1e-5;
  int sample_every = 12;  // ticks
  geo::Gps source;
};

/// Throws ConfigError when the sample rate does not divide the tick rate or
/// the observer footprint is degenerate.
Observer make_observer(const config::RunConfig& cfg);

struct Scored {
  std::optional<metrics::MetricsReport> report;  // empty when the drone never reached InPlume
  geom::Polygon contour;    // last scored frame
  geom::Polyline skeleton;
  std::vector<Vec2> track;  // observer pixels of every sample
  sensor::SegMask last_frame;
};

/// Receives every observer frame that is scored, in order.
using FrameSink = std::function<void(int sample, long tick, const sensor::SegMask& frame)>;

Scored score_episode(const mission::EpisodeLog& log, const config::RunConfig& cfg, const FrameSink& sink = {});

/// Flies one episode with the given controller, stamping the config hash.
/// `cfg.mission.controller` is overridden by `controller`.
mission::EpisodeLog run_mission(const config::RunConfig& cfg, sim::ScenarioKind scenario,
                                mission::ControllerKind controller, std::uint64_t seed, double duration,
                                const rl::PolicySnapshot* policy = nullptr);

/// The configuration a run with this controller is recorded under.
config::RunConfig with_controller(const config::RunConfig& cfg, mission::ControllerKind controller);

}  // namespace plume::eval
