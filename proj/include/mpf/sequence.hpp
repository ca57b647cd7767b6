#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "mpf/geometry.hpp"

namespace mpf {

/// One detector output. Descriptor and ground-truth fields are optional so that
/// simulator output and externally supplied detections share one format.
struct Detection {
  geometry::BoundingBox box;
  std::optional<Eigen::VectorXd> descriptor;
  std::optional<int> person_id;
  std::optional<geometry::BoundingBox> truth_box;  // noise-free box, simulator only
};

struct PersonTruth {
  int id = 0;
  double x = 0.0;
  double y = 0.0;
  bool detected = false;
};

struct FrameRecord {
  std::int64_t frame_index = 0;
  double timestamp = 0.0;
  std::vector<Detection> detections;
  std::optional<geometry::Pose2D> robot_pose;
  std::vector<PersonTruth> people;

  const PersonTruth* person(int id) const {
    for (const auto& p : people) {
      if (p.id == id) return &p;
    }
    return nullptr;
  }
};

struct SequenceHeader {
  std::string scenario;
  double frame_rate = 30.0;
  int descriptor_dim = 0;  // 0 when detections carry no descriptors
  std::optional<int> target_id;
  std::optional<double> body_radius;  // m, the tracker's r when known
  std::optional<geometry::Calibration> calibration;
};

struct Sequence {
  SequenceHeader header;
  std::vector<FrameRecord> frames;
};

}  // namespace mpf
