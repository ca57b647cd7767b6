#include "mpf/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "mpf/errors.hpp"

namespace mpf::geometry {

namespace {

void check_rotation(const Eigen::Matrix3d& R, const char* field) {
  const double orth = (R * R.transpose() - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff();
  if (!(orth <= 1e-9) || std::abs(R.determinant() - 1.0) > 1e-9) {
    throw SchemaError(field, "rotation must be orthonormal with determinant +1");
  }
}

double box_width_or_throw(const BoundingBox& box) {
  const double w = box.u_br - box.u_tl;
  if (!(w > 0.0) || !std::isfinite(w)) {
    throw InvalidDetection("degenerate bounding box: u_br must exceed u_tl (width " +
                           std::to_string(w) + ")");
  }
  return w;
}

}  // namespace

void CameraIntrinsics::validate() const {
  if (!(fx > 0.0)) throw SchemaError("intrinsics.fx", "must be > 0");
  if (!(fy > 0.0)) throw SchemaError("intrinsics.fy", "must be > 0");
  if (image_width <= 0) throw SchemaError("intrinsics.width", "must be > 0");
  if (image_height <= 0) throw SchemaError("intrinsics.height", "must be > 0");
  if (!(cx > 0.0 && cx < image_width)) throw SchemaError("intrinsics.cx", "must lie inside (0, width)");
  if (!(cy > 0.0 && cy < image_height)) throw SchemaError("intrinsics.cy", "must lie inside (0, height)");
}

void Extrinsics::validate() const {
  check_rotation(R_world_robot, "extrinsics.R_world_robot");
  check_rotation(R_robot_cam, "extrinsics.R_robot_cam");
  if (!t_world_robot.allFinite()) throw SchemaError("extrinsics.t_world_robot", "must be finite");
  if (!t_robot_cam.allFinite()) throw SchemaError("extrinsics.t_robot_cam", "must be finite");
}

Eigen::Matrix3d forward_looking_camera_rotation() {
  Eigen::Matrix3d R;
  // camera x = -robot y, camera y = -robot z, camera z = robot x
  R << 0.0, -1.0, 0.0,
       0.0, 0.0, -1.0,
       1.0, 0.0, 0.0;
  return R;
}

void set_robot_pose(Extrinsics& extr, const Pose2D& pose) {
  const Eigen::Matrix3d R_robot_in_world =
      Eigen::AngleAxisd(pose.yaw, Eigen::Vector3d::UnitZ()).toRotationMatrix();
  extr.R_world_robot = R_robot_in_world.transpose();
  extr.t_world_robot = -extr.R_world_robot * Eigen::Vector3d(pose.x, pose.y, 0.0);
}

Extrinsics make_extrinsics(const Pose2D& pose, const CameraMount& mount) {
  Extrinsics extr;
  set_robot_pose(extr, pose);
  extr.R_robot_cam = forward_looking_camera_rotation();
  extr.t_robot_cam = -extr.R_robot_cam * Eigen::Vector3d(mount.forward, mount.lateral, mount.height);
  return extr;
}

Eigen::Matrix3d rotation_from_rpy(double roll, double pitch, double yaw) {
  return (Eigen::AngleAxisd(yaw, Eigen::Vector3d::UnitZ()) *
          Eigen::AngleAxisd(pitch, Eigen::Vector3d::UnitY()) *
          Eigen::AngleAxisd(roll, Eigen::Vector3d::UnitX()))
      .toRotationMatrix();
}

double iou(const BoundingBox& a, const BoundingBox& b) {
  const double iw = std::min(a.u_br, b.u_br) - std::max(a.u_tl, b.u_tl);
  const double ih = std::min(a.v_br, b.v_br) - std::max(a.v_tl, b.v_tl);
  if (iw <= 0.0 || ih <= 0.0) return 0.0;
  const double inter = iw * ih;
  const double uni = a.area() + b.area() - inter;
  return uni > 0.0 ? inter / uni : 0.0;
}

double coverage(const BoundingBox& box, const BoundingBox& occluder) {
  const double area = box.area();
  if (area <= 0.0) return 0.0;
  const double iw = std::min(box.u_br, occluder.u_br) - std::max(box.u_tl, occluder.u_tl);
  const double ih = std::min(box.v_br, occluder.v_br) - std::max(box.v_tl, occluder.v_tl);
  if (iw <= 0.0 || ih <= 0.0) return 0.0;
  return iw * ih / area;
}

Eigen::Vector2d ObservationModel::position_from(const ProcessedMeasurement& m) const {
  const Eigen::Matrix2d block = H.leftCols<2>();
  return block.colPivHouseholderQr().solve(m.y);
}

double estimate_depth(const BoundingBox& box, const CameraIntrinsics& intr, double body_radius) {
  if (!(body_radius > 0.0)) throw Error(ErrorCategory::invalid_argument, "body radius must be > 0");
  return intr.fx * body_radius / box_width_or_throw(box);
}

ProcessedMeasurement process_measurement(const BoundingBox& box, const CameraIntrinsics& intr,
                                         const Extrinsics& extr, double body_radius) {
  const double w = box_width_or_throw(box);
  if (!(body_radius > 0.0)) throw Error(ErrorCategory::invalid_argument, "body radius must be > 0");

  // World origin rotated into the camera frame, without the mount translation.
  const Eigen::Vector3d chain_offset = extr.R_robot_cam * extr.t_world_robot;

  ProcessedMeasurement m;
  m.y(0) = body_radius * (box.u_tl + box.u_br - 2.0 * intr.cx) / (2.0 * w) -
           extr.t_robot_cam.x() - chain_offset.x();
  m.y(1) = intr.fx * body_radius / w - extr.t_robot_cam.z() - chain_offset.z();
  return m;
}

ObservationModel build_observation_model(const Extrinsics& extr) {
  const Eigen::Matrix3d R = extr.R_robot_cam * extr.R_world_robot;
  ObservationModel model;
  model.H(0, 0) = R(0, 0);
  model.H(0, 1) = R(0, 1);
  model.H(1, 0) = R(2, 0);
  model.H(1, 1) = R(2, 1);
  return model;
}

std::optional<BoundingBox> project_person(const Eigen::Vector3d& world_pos, double body_radius,
                                          double height, const CameraIntrinsics& intr,
                                          const Extrinsics& extr) {
  constexpr double kMinDepth = 0.1;
  const Eigen::Vector3d base = extr.world_to_camera(world_pos);
  if (base.z() <= kMinDepth) return std::nullopt;

  // Chord through the person, perpendicular to the line of sight in the camera x-z plane.
  const double X = base.x();
  const double Z = base.z();
  const double D = std::hypot(X, Z);
  const double half = 0.5 * body_radius;
  const double nx = Z / D;
  const double nz = -X / D;
  const double x_a = X + half * nx, z_a = Z + half * nz;
  const double x_b = X - half * nx, z_b = Z - half * nz;
  if (z_a <= kMinDepth || z_b <= kMinDepth) return std::nullopt;

  const double u_a = intr.fx * x_a / z_a + intr.cx;
  const double u_b = intr.fx * x_b / z_b + intr.cx;

  const Eigen::Vector3d top = extr.world_to_camera(world_pos + Eigen::Vector3d(0.0, 0.0, height));
  const double v_base = intr.fy * base.y() / base.z() + intr.cy;
  const double v_top = top.z() > kMinDepth ? intr.fy * top.y() / top.z() + intr.cy
                                           : -std::numeric_limits<double>::infinity();

  BoundingBox box{std::min(u_a, u_b), std::min(v_base, v_top), std::max(u_a, u_b),
                  std::max(v_base, v_top)};
  const double centre = box.center_u();
  if (centre < 0.0 || centre >= intr.image_width) return std::nullopt;
  if (box.v_br <= 0.0 || box.v_tl >= intr.image_height) return std::nullopt;

  box.u_tl = std::max(box.u_tl, 0.0);
  box.u_br = std::min(box.u_br, static_cast<double>(intr.image_width));
  box.v_tl = std::max(box.v_tl, 0.0);
  box.v_br = std::min(box.v_br, static_cast<double>(intr.image_height));
  if (!box.valid()) return std::nullopt;
  return box;
}

}  // namespace mpf::geometry
