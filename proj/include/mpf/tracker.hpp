#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "mpf/geometry.hpp"

namespace mpf::tracking {

using TrackId = std::int64_t;

struct TrackerConfig {
  double delta_iou = 0.5;
  double process_noise_pos = 0.05;  // m / sqrt(s)
  double process_noise_vel = 0.5;   // (m/s) / sqrt(s)
  double measurement_noise = 0.1;   // m
  double gate_distance = 1.0;       // m, on the observation-space Euclidean distance
  int max_missed = 30;
  double body_radius = 0.25;
  int confirm_hits = 2;
  double init_pos_std = 0.5;
  double init_vel_std = 1.0;
  double default_dt = 1.0 / 30.0;

  void validate() const;
};

/// One person in the world frame, state [x, y, vx, vy].
struct TrackState {
  TrackId id = 0;
  Eigen::Vector4d s = Eigen::Vector4d::Zero();
  Eigen::Matrix4d P = Eigen::Matrix4d::Identity();
  int age = 0;     // frames since creation
  int missed = 0;  // consecutive frames without a matched measurement
  int hits = 0;    // total matched frames
  bool confirmed = false;
  bool valid = true;
  std::optional<geometry::BoundingBox> last_box;

  Eigen::Vector2d position() const { return s.head<2>(); }
  Eigen::Vector2d velocity() const { return s.tail<2>(); }
};

struct DetectionSet {
  std::vector<geometry::BoundingBox> boxes;
  std::int64_t frame_index = 0;
  std::optional<double> timestamp;
};

/// Indices of the boxes whose largest IoU with any other box in the frame is
/// strictly below `delta_iou`, in input order.
std::vector<std::size_t> filter_overlap_indices(std::span<const geometry::BoundingBox> boxes,
                                                double delta_iou);

DetectionSet filter_overlaps(const DetectionSet& dets, double delta_iou);

/// Constant-velocity prediction. Throws for dt <= 0.
TrackState predict(const TrackState& track, double dt, const TrackerConfig& cfg);

struct Association {
  std::vector<std::pair<std::size_t, std::size_t>> pairs;  // (track index, measurement index)
  std::vector<double> pair_costs;
  std::vector<std::size_t> unmatched_tracks;
  std::vector<std::size_t> unmatched_measurements;
};

/// Global nearest neighbour on d(i, j) = ||H s_i - y_j||^2. The assignment is the exact
/// global minimum; pairs whose cost exceeds gate^2 are then split into unmatched.
Association associate(std::span<const TrackState> tracks,
                      std::span<const geometry::ProcessedMeasurement> measurements,
                      const geometry::ObservationModel& model, double gate);

/// Kalman update (Joseph form, symmetrised). A non-finite innovation marks the track invalid
/// and leaves its state untouched.
TrackState update(const TrackState& track, const geometry::ProcessedMeasurement& y,
                  const geometry::ObservationModel& model, const Eigen::Matrix2d& R);

struct TrackBox {
  TrackId track_id = 0;
  std::size_t detection_index = 0;  // index into the unfiltered DetectionSet
  geometry::BoundingBox box;
  bool confirmed = false;
};

struct StepResult {
  std::vector<TrackBox> associations;
  std::vector<std::size_t> suppressed;  // removed by the overlap filter
  std::vector<std::size_t> dropped;     // invalid geometry
  std::vector<TrackId> born;
  std::vector<TrackId> removed;
  double dt = 0.0;
};

/// Multi-person width-based tracker. Single-threaded per instance.
class Tracker {
 public:
  explicit Tracker(TrackerConfig cfg = {});

  /// filter overlaps -> process measurements -> predict -> associate -> update -> birth/death.
  StepResult step(const DetectionSet& dets, const geometry::Calibration& calib);

  const std::vector<TrackState>& tracks() const { return tracks_; }
  const TrackState* find(TrackId id) const;
  const TrackerConfig& config() const { return cfg_; }

 private:
  TrackState birth(const geometry::ProcessedMeasurement& y, const geometry::ObservationModel& model,
                   const geometry::BoundingBox& box);

  TrackerConfig cfg_;
  std::vector<TrackState> tracks_;
  TrackId next_id_ = 1;
  std::optional<std::int64_t> last_frame_;
  std::optional<double> last_timestamp_;
};

}  // namespace mpf::tracking
