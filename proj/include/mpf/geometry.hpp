#pragma once

#include <optional>

#include <Eigen/Dense>

namespace mpf::geometry {

struct CameraIntrinsics {
  double fx = 910.0;
  double fy = 910.0;  // only used by the simulator for vertical box extent
  double cx = 640.0;
  double cy = 360.0;  // only used by the simulator
  int image_width = 1280;
  int image_height = 720;

  /// Throws SchemaError when any invariant is violated.
  void validate() const;
};

/// Rigid chain world -> robot -> camera:
///   p_robot  = R_world_robot * p_world + t_world_robot
///   p_camera = R_robot_cam   * p_robot + t_robot_cam
struct Extrinsics {
  Eigen::Matrix3d R_world_robot = Eigen::Matrix3d::Identity();
  Eigen::Vector3d t_world_robot = Eigen::Vector3d::Zero();
  Eigen::Matrix3d R_robot_cam = Eigen::Matrix3d::Identity();
  Eigen::Vector3d t_robot_cam = Eigen::Vector3d::Zero();

  static Extrinsics identity() { return {}; }

  void validate() const;

  Eigen::Vector3d world_to_robot(const Eigen::Vector3d& p_world) const {
    return R_world_robot * p_world + t_world_robot;
  }
  Eigen::Vector3d robot_to_camera(const Eigen::Vector3d& p_robot) const {
    return R_robot_cam * p_robot + t_robot_cam;
  }
  Eigen::Vector3d world_to_camera(const Eigen::Vector3d& p_world) const {
    return robot_to_camera(world_to_robot(p_world));
  }
};

/// Planar robot pose in the world frame.
struct Pose2D {
  double x = 0.0;
  double y = 0.0;
  double yaw = 0.0;
};

/// Where the camera sits on the robot, with the optical axis along robot +x.
struct CameraMount {
  double forward = 0.1;  // m, along robot x
  double lateral = 0.0;  // m, along robot y
  double height = 0.4;   // m, along robot z
};

/// Robot (x forward, y left, z up) to optical camera frame (x right, y down, z forward).
Eigen::Matrix3d forward_looking_camera_rotation();

/// World->robot part of the chain for a robot standing at `pose`.
void set_robot_pose(Extrinsics& extr, const Pose2D& pose);

/// Full chain for a forward-looking camera on a robot at `pose`.
Extrinsics make_extrinsics(const Pose2D& pose, const CameraMount& mount);

Eigen::Matrix3d rotation_from_rpy(double roll, double pitch, double yaw);

struct BoundingBox {
  double u_tl = 0.0;
  double v_tl = 0.0;
  double u_br = 0.0;
  double v_br = 0.0;

  double width() const { return u_br - u_tl; }
  double height() const { return v_br - v_tl; }
  double center_u() const { return 0.5 * (u_tl + u_br); }
  double center_v() const { return 0.5 * (v_tl + v_br); }
  double area() const { return valid() ? width() * height() : 0.0; }
  bool valid() const { return u_br > u_tl && v_br > v_tl; }

  friend bool operator==(const BoundingBox&, const BoundingBox&) = default;
};

double iou(const BoundingBox& a, const BoundingBox& b);

/// Fraction of `box` covered by `occluder` (0 when either is degenerate).
double coverage(const BoundingBox& box, const BoundingBox& occluder);

/// Everything the tracker needs to turn boxes into world-frame measurements.
struct Calibration {
  CameraIntrinsics intrinsics;
  Extrinsics extrinsics;
};

/// Box-derived observation fed to the Kalman filter: row 0 lateral (camera x),
/// row 1 depth (camera z), both with the camera-chain translation removed.
struct ProcessedMeasurement {
  Eigen::Vector2d y = Eigen::Vector2d::Zero();
};

/// Linear map from the planar state [x, y, vx, vy] to the expected observation.
struct ObservationModel {
  Eigen::Matrix<double, 2, 4> H = Eigen::Matrix<double, 2, 4>::Zero();

  Eigen::Vector2d expected(const Eigen::Vector4d& state) const { return H * state; }
  /// Inverts the position block; used to initialise tracks from a single measurement.
  Eigen::Vector2d position_from(const ProcessedMeasurement& m) const;
};

/// Range along the optical axis of a person of apparent width `body_radius`.
/// Throws InvalidDetection for a zero or negative box width.
double estimate_depth(const BoundingBox& box, const CameraIntrinsics& intr, double body_radius);

ProcessedMeasurement process_measurement(const BoundingBox& box, const CameraIntrinsics& intr,
                                         const Extrinsics& extr, double body_radius);

ObservationModel build_observation_model(const Extrinsics& extr);

/// Simulator projection of an upright person standing at `world_pos` (ground contact point).
///
/// The horizontal extent is the image of a chord of length `body_radius` through the person,
/// perpendicular to the camera line of sight. Directly ahead this reproduces
/// estimate_depth exactly; off-axis the estimate is biased short by roughly z(1 - cos(bearing)).
/// Returns nullopt when the person is behind the camera or the box centre leaves the image.
std::optional<BoundingBox> project_person(const Eigen::Vector3d& world_pos, double body_radius,
                                          double height, const CameraIntrinsics& intr,
                                          const Extrinsics& extr);

}  // namespace mpf::geometry
