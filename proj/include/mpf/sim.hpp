#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "mpf/controller.hpp"
#include "mpf/geometry.hpp"
#include "mpf/reid.hpp"
#include "mpf/sequence.hpp"

namespace mpf::sim {

struct Waypoint {
  double t = 0.0;  // s
  double x = 0.0;  // m, world
  double y = 0.0;
};

struct PedestrianSpec {
  int id = 0;
  double radius = 0.25;
  double height = 1.7;
  int cluster = 0;
  std::uint64_t appearance_seed = 0;
  std::vector<Waypoint> waypoints;  // time-ordered; position is held before the first and after the last
};

enum class EventType { occlusion, out_of_view, partial_view, crossing };

std::string to_string(EventType type);
EventType event_type_from_string(const std::string& name);

/// A scripted directive over the inclusive frame range [first_frame, last_frame].
///   occlusion / out_of_view: listed pedestrians produce no detection.
///   partial_view: upper-body visibility ramps 1 -> 0 over `ramp_frames` from first_frame and
///                 back 0 -> 1 over `ramp_frames` after last_frame.
///   crossing: annotation of a mutual crossing realised by the trajectories; no effect.
struct Event {
  EventType type = EventType::occlusion;
  std::vector<int> pedestrians;
  std::int64_t first_frame = 0;
  std::int64_t last_frame = 0;
  int ramp_frames = 0;
};

enum class RobotMode { fixed, scripted, follow };

struct RobotWaypoint {
  double t = 0.0;
  double x = 0.0;
  double y = 0.0;
  double yaw = 0.0;
};

struct RobotSpec {
  RobotMode mode = RobotMode::fixed;
  geometry::Pose2D initial_pose;
  std::vector<RobotWaypoint> trajectory;  // scripted
  control::PidGains gains;                // follow
};

struct Scenario {
  std::string name;
  double duration = 10.0;    // s
  double frame_rate = 30.0;  // Hz
  geometry::CameraIntrinsics camera;
  geometry::CameraMount mount;
  RobotSpec robot;
  double box_noise_px = 1.0;
  double occlusion_coverage = 0.7;  // fraction of a farther box hidden by a nearer one
  reid::SyntheticAppearanceConfig appearance;
  int target_id = 0;
  std::vector<PedestrianSpec> pedestrians;
  std::vector<Event> events;

  /// Throws SchemaError naming the offending field.
  void validate() const;
  std::int64_t frame_count() const;
  /// Inverse-width body radius shared by all pedestrians (the tracker's r).
  double body_radius() const;
  const PedestrianSpec& pedestrian(int id) const;
};

/// Ground-contact position of a pedestrian at time t.
Eigen::Vector2d pedestrian_position(const PedestrianSpec& p, double t);
/// Walking direction at time t (rad); a standing pedestrian keeps the last heading.
double pedestrian_heading(const PedestrianSpec& p, double t);

/// Unicycle kinematics, integrated exactly over dt for constant (v, w).
geometry::Pose2D step_plant(const geometry::Pose2D& pose, const control::ControlCommand& cmd, double dt);

/// Frame-by-frame simulator. `render` produces the current frame, `advance` moves time
/// forward, optionally applying an external command to the robot (closed-loop tests);
/// without one the robot follows its scenario mode.
class Simulator {
 public:
  Simulator(Scenario scenario, std::uint64_t seed);

  bool done() const { return frame_ >= scenario_.frame_count(); }
  std::int64_t frame_index() const { return frame_; }
  double time() const { return static_cast<double>(frame_) / scenario_.frame_rate; }
  const geometry::Pose2D& robot_pose() const { return pose_; }
  geometry::Extrinsics extrinsics() const;
  const Scenario& scenario() const { return scenario_; }
  const reid::SyntheticExtractor& extractor() const { return extractor_; }

  FrameRecord render();
  void advance(const std::optional<control::ControlCommand>& command = std::nullopt);

  /// Upper-body visibility of a pedestrian in a given frame.
  double upper_visibility(int pedestrian_id, std::int64_t frame) const;
  bool suppressed_by_directive(int pedestrian_id, std::int64_t frame) const;

 private:
  Scenario scenario_;
  std::uint64_t seed_;
  reid::SyntheticExtractor extractor_;
  std::mt19937_64 box_rng_;
  std::int64_t frame_ = 0;
  geometry::Pose2D pose_;
  control::ControllerState follow_state_;
};

/// Runs the simulator open-loop over the whole scenario. Deterministic in (scenario, seed).
Sequence generate(const Scenario& scenario, std::uint64_t seed);

/// Header describing a scenario's sequence (calibration uses the initial robot pose).
SequenceHeader make_header(const Scenario& scenario);

std::vector<std::string> builtin_scenario_names();
std::map<std::string, Scenario> builtin_scenarios();
/// Throws SchemaError for an unknown name.
Scenario builtin_scenario(const std::string& name);

}  // namespace mpf::sim
