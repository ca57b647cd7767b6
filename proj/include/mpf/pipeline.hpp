#pragma once

#include <cstdint>
#include <future>
#include <memory>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "mpf/controller.hpp"
#include "mpf/geometry.hpp"
#include "mpf/reid.hpp"
#include "mpf/sequence.hpp"
#include "mpf/tracker.hpp"

namespace mpf::eval {

struct PipelineConfig {
  tracking::TrackerConfig tracker;
  reid::ReidConfig reid;
  control::PidGains controller;
  bool reid_enabled = true;
  bool controller_enabled = false;
  /// Train on a worker thread; the new weights are published at the next frame boundary.
  bool async_training = false;
  std::uint64_t seed = 0;

  void validate() const;
};

struct TrackReport {
  tracking::TrackId id = 0;
  Eigen::Vector2d position = Eigen::Vector2d::Zero();  // world
  geometry::BoundingBox box;
  std::size_t detection_index = 0;
  bool confirmed = false;
  std::optional<int> person_id;
  std::optional<double> score;
};

struct FrameOutput {
  std::int64_t frame_index = 0;
  double timestamp = 0.0;
  std::vector<TrackReport> tracks;
  std::optional<reid::FollowMode> mode;  // absent with re-identification disabled
  std::optional<tracking::TrackId> target;
  std::optional<geometry::BoundingBox> target_box;
  std::optional<int> target_person;  // ground-truth id behind the target box, if known
  std::optional<Eigen::Vector2d> target_world;
  std::optional<control::ControlCommand> command;
  bool classifier_trained = false;
};

/// The per-frame loop: track people, describe them, run the follow / re-identification
/// logic, train the classifier on the confirmed target, and steer toward it.
///
/// The target is picked as the nearest confirmed person whenever no trained classifier is
/// available to re-identify it.
class FollowPipeline {
 public:
  FollowPipeline(geometry::Calibration calibration, PipelineConfig cfg);
  ~FollowPipeline();

  FollowPipeline(const FollowPipeline&) = delete;
  FollowPipeline& operator=(const FollowPipeline&) = delete;

  FrameOutput process(const FrameRecord& frame);

  const tracking::Tracker& tracker() const { return tracker_; }
  const reid::FollowerState& follower() const { return follower_; }
  const reid::SampleSet& samples() const { return samples_; }
  const reid::RidgeClassifier& classifier() const { return *classifier_; }

 private:
  void publish_pending_classifier();
  void schedule_training();

  geometry::Calibration calibration_;
  PipelineConfig cfg_;
  tracking::Tracker tracker_;
  std::unique_ptr<reid::DescriptorExtractor> extractor_;
  reid::FollowerState follower_;
  reid::SampleSet samples_;
  std::shared_ptr<const reid::RidgeClassifier> classifier_;
  std::future<std::shared_ptr<const reid::RidgeClassifier>> pending_;
  control::ControllerState controller_state_;
  std::uint64_t trained_version_ = 0;
  std::int64_t frames_following_ = 0;
};

}  // namespace mpf::eval
