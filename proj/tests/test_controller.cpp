#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "mpf/controller.hpp"
#include "mpf/errors.hpp"
#include "mpf/sim.hpp"

using namespace mpf;
using namespace mpf::control;

namespace {

PidGains p_only(double kp_lin, double kp_ang) {
  PidGains g;
  g.linear = {kp_lin, 0.0, 0.0};
  g.angular = {kp_ang, 0.0, 0.0};
  return g;
}

}  // namespace

TEST(Controller, ZeroErrorGivesZeroCommand) {
  const PidGains g;
  ControllerState s;
  for (int k = 0; k < 5; ++k) {
    auto [cmd, next] = compute_command({g.x_setpoint, 0.0}, 0.1, g, s);
    EXPECT_DOUBLE_EQ(cmd.linear_velocity, 0.0);
    EXPECT_DOUBLE_EQ(cmd.angular_velocity, 0.0);
    s = next;
  }
}

TEST(Controller, ProportionalOnly) {
  const auto [cmd, s] = compute_command({2.5, 0.0}, 0.1, p_only(0.5, 0.0), ControllerState{});
  EXPECT_DOUBLE_EQ(cmd.linear_velocity, 0.5);
  EXPECT_DOUBLE_EQ(cmd.angular_velocity, 0.0);
  EXPECT_TRUE(s.has_prev);
}

TEST(Controller, TurnsTowardTarget) {
  const auto g = p_only(0.5, 1.0);
  EXPECT_GT(compute_command({3.0, 0.5}, 0.1, g, {}).first.angular_velocity, 0.0);   // left
  EXPECT_LT(compute_command({3.0, -0.5}, 0.1, g, {}).first.angular_velocity, 0.0);  // right
  EXPECT_LT(compute_command({1.0, 0.0}, 0.1, g, {}).first.linear_velocity, 0.0);    // too close
}

TEST(Controller, OutputsSaturate) {
  const PidGains g;
  const auto [cmd, s] = compute_command({50.0, -40.0}, 0.1, g, {});
  EXPECT_DOUBLE_EQ(cmd.linear_velocity, g.v_max);
  EXPECT_DOUBLE_EQ(cmd.angular_velocity, -g.w_max);
}

TEST(Controller, IntegralClampedAndDerivative) {
  PidGains g;
  g.linear = {0.0, 1.0, 0.0};
  g.integral_limit = 0.3;
  ControllerState s;
  for (int k = 0; k < 100; ++k) s = compute_command({3.5, 0.0}, 0.1, g, s).second;
  EXPECT_DOUBLE_EQ(s.integral_x, 0.3);

  PidGains d;
  d.linear = {0.0, 0.0, 1.0};
  d.angular = {0.0, 0.0, 0.0};
  auto [first, s1] = compute_command({2.0, 0.0}, 0.1, d, {});
  EXPECT_DOUBLE_EQ(first.linear_velocity, 0.0);  // no derivative on the first step
  auto [second, s2] = compute_command({2.1, 0.0}, 0.1, d, s1);
  EXPECT_NEAR(second.linear_velocity, 1.0, 1e-9);
}

TEST(Controller, ResetClearsMemory) {
  ControllerState s;
  s = compute_command({4.0, 1.0}, 0.1, PidGains{}, s).second;
  const auto r = reset(s);
  EXPECT_EQ(r.integral_x, 0.0);
  EXPECT_EQ(r.integral_y, 0.0);
  EXPECT_FALSE(r.has_prev);
}

TEST(Controller, RejectsNonPositiveDt) {
  EXPECT_THROW(compute_command({1.0, 0.0}, 0.0, PidGains{}, {}), Error);
}

TEST(Controller, ClosedLoopReachesStandoff) {
  const Eigen::Vector2d target(3.0, 1.0);
  const PidGains g;
  const double dt = 1.0 / 30.0;
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> pos(-1.0, 1.0), yaw(-0.6, 0.6);
  for (int trial = 0; trial < 10; ++trial) {
    geometry::Pose2D pose{pos(rng), pos(rng), 0.0};
    const Eigen::Vector2d d = target - Eigen::Vector2d(pose.x, pose.y);
    pose.yaw = std::atan2(d.y(), d.x()) + yaw(rng);
    ControllerState state;
    Eigen::Vector2d rel;
    for (int k = 0; k < static_cast<int>(20.0 / dt); ++k) {
      const double c = std::cos(pose.yaw), s = std::sin(pose.yaw);
      const Eigen::Vector2d w = target - Eigen::Vector2d(pose.x, pose.y);
      rel = Eigen::Vector2d(c * w.x() + s * w.y(), -s * w.x() + c * w.y());
      auto [cmd, next] = compute_command(rel, dt, g, state);
      state = next;
      pose = sim::step_plant(pose, cmd, dt);
    }
    EXPECT_NEAR(rel.x(), g.x_setpoint, 0.05) << "trial " << trial;
    EXPECT_NEAR(rel.y(), 0.0, 0.05) << "trial " << trial;
  }
}
