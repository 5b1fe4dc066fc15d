#include "plume/pid.hpp"

#include <algorithm>

namespace plume::control {

PidOutput pid_step(const PidGains& g, const PidState& state, double error, double dt) {
  PidOutput out;
  out.state = state;
  out.state.integral = std::clamp(state.integral + error * dt, -g.i_clamp, g.i_clamp);
  const double derivative = state.initialized ? (error - state.prev_error) / dt : 0.0;
  out.state.prev_error = error;
  out.state.initialized = true;
  const double u = g.kp * error + g.ki * out.state.integral + g.kd * derivative;
  out.output = std::clamp(u, -g.out_clamp, g.out_clamp);
  return out;
}

double AxisPid::step(double error, double dt) {
  auto r = pid_step(gains, state, error, dt);
  state = r.state;
  return r.output;
}

ServoCommand descent_command(const std::optional<sensor::BBox>& bbox, const sensor::CameraModel& cam,
                             AxisPid& lateral, AxisPid& longitudinal, double v_descend, double dt) {
  ServoCommand out;
  if (!bbox) {
    out.target_lost = true;
    return out;
  }
  const Vec2 c = bbox->center();
  const double ex = c.x() - 0.5 * cam.width;
  // Image up is body forward: a box below the target row means the drone
  // should back off so the smoke slides up the frame.
  const double ey = c.y() - 0.25 * cam.height;
  out.cmd.vy = lateral.step(ex, dt);
  out.cmd.vx = -longitudinal.step(ey, dt);
  out.cmd.vz = -v_descend;
  return out;
}

ServoCommand inplume_command(const std::optional<Vec2>& centroid, const sensor::CameraModel& cam,
                             AxisPid& lateral, AxisPid& vertical, double v_forward, double dt) {
  ServoCommand out;
  out.cmd.vx = v_forward;
  if (!centroid) {
    out.target_lost = true;
    return out;
  }
  const double ex = centroid->x() - 0.5 * cam.width;
  const double ey = 0.5 * cam.height - centroid->y();
  out.cmd.vy = lateral.step(ex, dt);
  out.cmd.vz = vertical.step(ey, dt);
  return out;
}

}  // namespace plume::control
