#pragma once

#include "plume/common.hpp"
#include "plume/sensor.hpp"
#include "plume/sim.hpp"

#include <optional>

namespace plume::control {

struct PidGains {
  double kp = 0.004;
  double ki = 0.0002;
  double kd = 0.002;
  double i_clamp = 500.0;   // bound on the accumulated error integral
  double out_clamp = 1.5;   // m/s
};

struct PidState {
  double integral = 0.0;
  double prev_error = 0.0;
  bool initialized = false;
};

struct PidOutput {
  double output = 0.0;
  PidState state;
};

/// Derivative-on-error PID with a hard integral clamp; the derivative term is
/// zero on the first call after a reset.
PidOutput pid_step(const PidGains& gains, const PidState& state, double error, double dt);

/// Per-axis gains and state for the two image axes.
struct AxisPid {
  PidGains gains;
  PidState state;
  double step(double error, double dt);
  void reset() { state = {}; }
};

struct ServoCommand {
  sim::VelocityCommand cmd;
  bool target_lost = false;
};

/// Descending-phase law: keeps the smoke bounding-box centre at (W/2, H/4) of
/// a nadir image while descending at constant speed.
ServoCommand descent_command(const std::optional<sensor::BBox>& bbox, const sensor::CameraModel& cam,
                             AxisPid& lateral, AxisPid& longitudinal, double v_descend, double dt);

/// In-plume law: centres the smoke centroid in the forward image while
/// flying forward at constant speed.
ServoCommand inplume_command(const std::optional<Vec2>& centroid, const sensor::CameraModel& cam,
                             AxisPid& lateral, AxisPid& vertical, double v_forward, double dt);

}  // namespace plume::control
