#include <gtest/gtest.h>

#include <random>

#include "mpf/errors.hpp"
#include "mpf/geometry.hpp"
#include "oracles.hpp"

using namespace mpf;
using namespace mpf::geometry;

namespace {

CameraIntrinsics intr500() {
  CameraIntrinsics c;
  c.fx = c.fy = 500.0;
  c.cx = 320.0;
  c.cy = 240.0;
  c.image_width = 640;
  c.image_height = 480;
  return c;
}

}  // namespace

TEST(EstimateDepth, DirectEvaluation) {
  EXPECT_DOUBLE_EQ(estimate_depth({100, 0, 150, 10}, intr500(), 0.25), 2.5);
}

TEST(EstimateDepth, InverseProportionalToWidth) {
  EXPECT_DOUBLE_EQ(estimate_depth({100, 0, 150, 10}, intr500(), 0.25), 2.5);
  EXPECT_DOUBLE_EQ(estimate_depth({100, 0, 200, 10}, intr500(), 0.25), 1.25);
}

TEST(EstimateDepth, StrictlyDecreasingInWidth) {
  double last = std::numeric_limits<double>::infinity();
  for (double w = 1.0; w < 600.0; w += 7.3) {
    const double z = estimate_depth({10, 0, 10 + w, 10}, intr500(), 0.25);
    EXPECT_LT(z, last);
    last = z;
  }
}

TEST(EstimateDepth, DegenerateBoxIsInvalidDetection) {
  EXPECT_THROW(estimate_depth({150, 0, 150, 10}, intr500(), 0.25), InvalidDetection);
  EXPECT_THROW(estimate_depth({150, 0, 140, 10}, intr500(), 0.25), InvalidDetection);
  try {
    estimate_depth({150, 0, 150, 10}, intr500(), 0.25);
  } catch (const Error& e) {
    EXPECT_EQ(e.category(), ErrorCategory::invalid_detection);
  }
}

TEST(EstimateDepth, RoundTripThroughSimulatorProjection) {
  CameraIntrinsics in = intr500();
  const Extrinsics e = make_extrinsics({}, CameraMount{0.0, 0.0, 0.4});
  const auto box = project_person({3.0, 0.0, 0.0}, 0.25, 1.7, in, e);
  ASSERT_TRUE(box);
  EXPECT_NEAR(estimate_depth(*box, in, 0.25), 3.0, 1e-6);
}

TEST(ProcessMeasurement, CenteredBoxIdentityExtrinsics) {
  const auto m = process_measurement({295, 0, 345, 10}, intr500(), Extrinsics::identity(), 0.25);
  EXPECT_DOUBLE_EQ(m.y(0), 0.0);
  EXPECT_DOUBLE_EQ(m.y(1), 2.5);
}

TEST(ProcessMeasurement, ShiftedBoxIdentityExtrinsics) {
  // midpoint c_x + 100, width 50
  const auto m = process_measurement({395, 0, 445, 10}, intr500(), Extrinsics::identity(), 0.25);
  EXPECT_DOUBLE_EQ(m.y(0), 0.5);
}

TEST(ProcessMeasurement, DegenerateBoxThrows) {
  EXPECT_THROW(process_measurement({10, 0, 10, 5}, intr500(), Extrinsics::identity(), 0.25), InvalidDetection);
}

TEST(ProcessMeasurement, IdentityExtrinsicsGivesCameraXZ) {
  // person directly ahead: with identity extrinsics the camera frame is the world frame
  for (double z : {0.7, 1.5, 3.0, 6.5}) {
    const Eigen::Vector3d cam(0.0, 0.0, z);
    const auto box = oracle::pinhole_box(cam, 0.25, 500.0, 320.0);
    const auto m = process_measurement(box, intr500(), Extrinsics::identity(), 0.25);
    EXPECT_NEAR(m.y(0), 0.0, 1e-12);
    EXPECT_NEAR(m.y(1), z, 1e-12);
  }
}

TEST(ProcessMeasurement, SimulatorBoxMatchesObservationModel) {
  // nontrivial chain: robot at (0.5, -0.3) yawed 0.2 rad, camera mount offset laterally
  const Extrinsics e = make_extrinsics({0.5, -0.3, 0.2}, CameraMount{0.15, 0.05, 0.5});
  CameraIntrinsics in;
  // put the person on the optical axis so the chord width model is exact
  const Eigen::Vector3d cam_dir = e.R_robot_cam.transpose() * Eigen::Vector3d(0, 0, 1);
  const Eigen::Vector3d cam_origin_robot = -e.R_robot_cam.transpose() * e.t_robot_cam;
  const double s = 2.2;
  const Eigen::Vector3d robot_pt = cam_origin_robot + s * cam_dir;
  const Eigen::Vector3d world_pt = e.R_world_robot.transpose() * (robot_pt - e.t_world_robot);
  const Eigen::Vector3d ground(world_pt.x(), world_pt.y(), 0.0);
  const auto box = project_person(ground, 0.25, 1.7, in, e);
  ASSERT_TRUE(box);
  const auto m = process_measurement(*box, in, e, 0.25);
  const auto model = build_observation_model(e);
  const Eigen::Vector4d state(ground.x(), ground.y(), 0.3, -0.2);
  EXPECT_NEAR((m.y - model.expected(state)).norm(), 0.0, 1e-6);
}

TEST(ObservationModel, ConventionalRotationIdentityPose) {
  Extrinsics e;
  e.R_robot_cam = forward_looking_camera_rotation();
  const auto model = build_observation_model(e);
  Eigen::Matrix<double, 2, 4> expected;
  expected << 0, -1, 0, 0,
              1, 0, 0, 0;
  EXPECT_EQ(model.H, expected);
}

TEST(ObservationModel, VelocityColumnsExactlyZero) {
  std::mt19937_64 rng(5);
  for (int k = 0; k < 50; ++k) {
    const auto model = build_observation_model(oracle::random_extrinsics(rng));
    EXPECT_EQ(model.H.col(2), Eigen::Vector2d::Zero());
    EXPECT_EQ(model.H.col(3), Eigen::Vector2d::Zero());
    const Eigen::Vector4d a(1.0, 2.0, 0.0, 0.0), b(1.0, 2.0, -5.0, 7.0);
    EXPECT_EQ(model.expected(a), model.expected(b));
  }
}

// H s against the nonlinear projection of (x, y, 0) through the full rigid chain.
TEST(ObservationModel, MatchesNonlinearChainOnRandomExtrinsics) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-10.0, 10.0);
  for (int k = 0; k < 1000; ++k) {
    const Extrinsics e = oracle::random_extrinsics(rng);
    const double x = u(rng), y = u(rng);
    const Eigen::Vector2d want = oracle::rearranged_observation(e, x, y);
    const Eigen::Vector2d got = build_observation_model(e).expected({x, y, u(rng), u(rng)});
    EXPECT_NEAR((got - want).cwiseAbs().maxCoeff(), 0.0, 1e-9);
  }
}

// A pinhole box of a person in front of a random camera, pushed through process_measurement,
// must equal H s. This closes the loop from pixels to the state.
TEST(ObservationModel, ProcessedPinholeBoxEqualsHs) {
  std::mt19937_64 rng(12);
  std::uniform_real_distribution<double> u(-4.0, 4.0);
  CameraIntrinsics in;
  int checked = 0;
  while (checked < 300) {
    const Extrinsics e = oracle::random_extrinsics(rng);
    const double x = u(rng), y = u(rng);
    const Eigen::Vector3d cam = e.world_to_camera({x, y, 0.0});
    if (cam.z() < 0.5) continue;
    const auto box = oracle::pinhole_box(cam, 0.25, in.fx, in.cx);
    const auto m = process_measurement(box, in, e, 0.25);
    const Eigen::Vector2d hs = build_observation_model(e).expected({x, y, 0.0, 0.0});
    EXPECT_NEAR((m.y - hs).cwiseAbs().maxCoeff(), 0.0, 1e-8 * std::max(1.0, cam.z()));
    ++checked;
  }
}

// Squaring the translation terms instead of subtracting them
// breaks the consistency with H s whenever the translations are not 0 or 1, and does not
// scale like a length.
TEST(ObservationModel, SquaredTranslationVariantIsRejected) {
  std::mt19937_64 rng(13);
  CameraIntrinsics in;
  const Extrinsics e = oracle::random_extrinsics(rng);
  const Eigen::Vector3d cam = e.world_to_camera({1.0, 0.5, 0.0});
  ASSERT_GT(std::abs(cam.z()), 0.0);
  Extrinsics front = e;
  if (cam.z() < 0.5) front.t_robot_cam.z() += 3.0 - cam.z();
  const Eigen::Vector3d c = front.world_to_camera({1.0, 0.5, 0.0});
  const auto box = oracle::pinhole_box(c, 0.25, in.fx, in.cx);
  const double w = box.width();
  const Eigen::Vector3d shift = front.R_robot_cam * front.t_world_robot;
  const double y0_sq = 0.25 * (box.u_tl + box.u_br - 2 * in.cx) / (2 * w) -
                       front.t_robot_cam.x() * front.t_robot_cam.x() - shift.x();
  const double y1_sq = in.fx * 0.25 / w - front.t_robot_cam.z() * front.t_robot_cam.z() - shift.z();
  const Eigen::Vector2d hs = build_observation_model(front).expected({1.0, 0.5, 0, 0});
  EXPECT_GT(std::abs(y0_sq - hs(0)) + std::abs(y1_sq - hs(1)), 1e-3);
  const auto m = process_measurement(box, in, front, 0.25);
  EXPECT_NEAR((m.y - hs).norm(), 0.0, 1e-9);

  // Dimensional check: rescaling every length by k must rescale the observation by k.
  // The squared form picks up k^2 on the translation and fails.
  const double k = 3.0;
  Extrinsics scaled = front;
  scaled.t_robot_cam *= k;
  scaled.t_world_robot *= k;
  const Eigen::Vector3d cs = scaled.world_to_camera({k * 1.0, k * 0.5, 0.0});
  const auto box_s = oracle::pinhole_box(cs, k * 0.25, in.fx, in.cx);
  const auto ms = process_measurement(box_s, in, scaled, k * 0.25);
  EXPECT_NEAR((ms.y - k * m.y).norm(), 0.0, 1e-9);
  const double ws = box_s.width();
  const double y1_sq_scaled = in.fx * k * 0.25 / ws - scaled.t_robot_cam.z() * scaled.t_robot_cam.z() -
                              (scaled.R_robot_cam * scaled.t_world_robot).z();
  EXPECT_GT(std::abs(y1_sq_scaled - k * y1_sq), 1e-3);
}

TEST(ObservationModel, PositionFromInvertsPositionBlock) {
  const Extrinsics e = make_extrinsics({1.0, 2.0, 0.7}, CameraMount{});
  const auto model = build_observation_model(e);
  const Eigen::Vector4d s(3.0, -1.0, 0.0, 0.0);
  const ProcessedMeasurement m{model.expected(s)};
  EXPECT_NEAR((model.position_from(m) - s.head<2>()).norm(), 0.0, 1e-12);
}

TEST(Extrinsics, ValidateRejectsNonOrthonormal) {
  Extrinsics e;
  e.R_robot_cam(0, 0) = 1.1;
  EXPECT_THROW(e.validate(), SchemaError);
  Extrinsics f;
  f.R_world_robot = -Eigen::Matrix3d::Identity();  // det -1
  EXPECT_THROW(f.validate(), SchemaError);
}

TEST(Intrinsics, ValidateRejectsBadPrincipalPoint) {
  CameraIntrinsics c;
  c.cx = 0.0;
  EXPECT_THROW(c.validate(), SchemaError);
  c = CameraIntrinsics{};
  c.fx = -1.0;
  EXPECT_THROW(c.validate(), SchemaError);
}

TEST(ProjectPerson, DirectlyAheadWidth) {
  CameraIntrinsics in = intr500();
  const Extrinsics e = make_extrinsics({}, CameraMount{0.0, 0.0, 0.4});
  const auto box = project_person({2.5, 0.0, 0.0}, 0.25, 1.7, in, e);
  ASSERT_TRUE(box);
  EXPECT_NEAR(box->width(), 50.0, 1e-9);
  EXPECT_NEAR(box->center_u(), in.cx, 1e-9);
}

TEST(ProjectPerson, OutsideFieldOfViewOrBehind) {
  CameraIntrinsics in = intr500();
  const Extrinsics e = make_extrinsics({}, CameraMount{});
  EXPECT_FALSE(project_person({2.0, 10.0, 0.0}, 0.25, 1.7, in, e));
  EXPECT_FALSE(project_person({-2.0, 0.0, 0.0}, 0.25, 1.7, in, e));
}

TEST(ProjectPerson, LateralOffsetBiasGrowsWithOffset) {
  CameraIntrinsics in;
  const Extrinsics e = make_extrinsics({}, CameraMount{0.0, 0.0, 0.4});
  double last = -1.0;
  for (double y : {0.0, 0.3, 0.6, 0.9, 1.2}) {
    const auto box = project_person({4.0, y, 0.0}, 0.25, 1.7, in, e);
    ASSERT_TRUE(box);
    const double z = e.world_to_camera({4.0, y, 0.0}).z();
    const double dev = std::abs(estimate_depth(*box, in, 0.25) - z);
    EXPECT_GT(dev, last);
    last = dev;
  }
}

TEST(ProjectPerson, ClippedToImage) {
  CameraIntrinsics in;
  const Extrinsics e = make_extrinsics({}, CameraMount{});
  const auto box = project_person({0.6, 0.0, 0.0}, 0.25, 1.7, in, e);
  ASSERT_TRUE(box);
  EXPECT_GE(box->v_tl, 0.0);
  EXPECT_LE(box->v_br, in.image_height);
}

TEST(Iou, KnownValues) {
  EXPECT_DOUBLE_EQ(iou({0, 0, 10, 10}, {0, 0, 10, 10}), 1.0);
  EXPECT_DOUBLE_EQ(iou({0, 0, 10, 10}, {20, 20, 30, 30}), 0.0);
  EXPECT_NEAR(iou({0, 0, 10, 10}, {5, 0, 15, 10}), 50.0 / 150.0, 1e-12);
  EXPECT_NEAR(coverage({0, 0, 10, 10}, {5, 0, 15, 10}), 0.5, 1e-12);
}
