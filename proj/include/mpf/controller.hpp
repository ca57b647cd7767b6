#pragma once

#include <utility>

#include <Eigen/Dense>

namespace mpf::control {

struct ControlCommand {
  double linear_velocity = 0.0;   // m/s
  double angular_velocity = 0.0;  // rad/s
};

struct AxisGains {
  double kp = 0.0;
  double ki = 0.0;
  double kd = 0.0;
};

struct PidGains {
  AxisGains linear{0.8, 0.05, 0.05};
  AxisGains angular{2.0, 0.0, 0.05};
  double integral_limit = 1.0;  // bound on each accumulated error integral, m*s
  double v_max = 1.2;
  double w_max = 1.5;
  double x_setpoint = 1.5;

  void validate() const;
};

struct ControllerState {
  double integral_x = 0.0;
  double integral_y = 0.0;
  double prev_error_x = 0.0;
  double prev_error_y = 0.0;
  bool has_prev = false;
};

/// PID on the target position in the robot frame (x forward, y left).
///
/// Linear velocity drives x toward the setpoint. The lateral error is 0 - y; the heading
/// correction turns toward the target, so the angular command is the negated PID output
/// (positive, i.e. left, for a target on the left). Integrals are clamped to
/// +-integral_limit, the derivative is zero on the first step, outputs are saturated.
std::pair<ControlCommand, ControllerState> compute_command(const Eigen::Vector2d& target_robot,
                                                           double dt, const PidGains& gains,
                                                           const ControllerState& state);

/// Clears integrators and derivative memory.
ControllerState reset(const ControllerState& state);

}  // namespace mpf::control
