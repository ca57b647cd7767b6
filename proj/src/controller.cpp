#include "mpf/controller.hpp"

#include <algorithm>

#include "mpf/errors.hpp"

namespace mpf::control {

void PidGains::validate() const {
  for (const AxisGains* g : {&linear, &angular}) {
    if (g->kp < 0.0 || g->ki < 0.0 || g->kd < 0.0) throw SchemaError("controller", "gains must be >= 0");
  }
  if (!(integral_limit > 0.0)) throw SchemaError("controller.integral_limit", "must be > 0");
  if (!(v_max > 0.0)) throw SchemaError("controller.v_max", "must be > 0");
  if (!(w_max > 0.0)) throw SchemaError("controller.w_max", "must be > 0");
}

std::pair<ControlCommand, ControllerState> compute_command(const Eigen::Vector2d& target_robot,
                                                           double dt, const PidGains& gains,
                                                           const ControllerState& state) {
  if (!(dt > 0.0)) throw Error(ErrorCategory::invalid_argument, "compute_command: dt must be > 0");

  const double ex = target_robot.x() - gains.x_setpoint;
  const double ey = 0.0 - target_robot.y();

  ControllerState next = state;
  next.integral_x = std::clamp(state.integral_x + ex * dt, -gains.integral_limit, gains.integral_limit);
  next.integral_y = std::clamp(state.integral_y + ey * dt, -gains.integral_limit, gains.integral_limit);
  const double dex = state.has_prev ? (ex - state.prev_error_x) / dt : 0.0;
  const double dey = state.has_prev ? (ey - state.prev_error_y) / dt : 0.0;
  next.prev_error_x = ex;
  next.prev_error_y = ey;
  next.has_prev = true;

  const double v = gains.linear.kp * ex + gains.linear.ki * next.integral_x + gains.linear.kd * dex;
  const double w = -(gains.angular.kp * ey + gains.angular.ki * next.integral_y + gains.angular.kd * dey);

  ControlCommand cmd;
  cmd.linear_velocity = std::clamp(v, -gains.v_max, gains.v_max);
  cmd.angular_velocity = std::clamp(w, -gains.w_max, gains.w_max);
  return {cmd, next};
}

ControllerState reset(const ControllerState&) { return ControllerState{}; }

}  // namespace mpf::control
