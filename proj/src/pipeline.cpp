#include "mpf/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include "mpf/errors.hpp"

namespace mpf::eval {

using reid::Descriptor;
using reid::FollowMode;
using tracking::TrackId;

void PipelineConfig::validate() const {
  tracker.validate();
  reid.validate();
  controller.validate();
}

FollowPipeline::FollowPipeline(geometry::Calibration calibration, PipelineConfig cfg)
    : calibration_(std::move(calibration)),
      cfg_((cfg.validate(), std::move(cfg))),
      tracker_(cfg_.tracker),
      samples_(cfg_.reid.mode, cfg_.reid.capacity, cfg_.reid.long_term_fraction, cfg_.seed),
      classifier_(std::make_shared<const reid::RidgeClassifier>(cfg_.reid.lambda)) {
  calibration_.intrinsics.validate();
  calibration_.extrinsics.validate();
  reid::ExtractorOptions options;
  options.dim = cfg_.reid.descriptor_dim;
  extractor_ = reid::make_extractor(cfg_.reid.extractor, options);
}

FollowPipeline::~FollowPipeline() {
  if (pending_.valid()) pending_.wait();
}

void FollowPipeline::publish_pending_classifier() {
  if (!pending_.valid()) return;
  if (auto next = pending_.get()) classifier_ = std::move(next);
}

void FollowPipeline::schedule_training() {
  trained_version_ = samples_.version();
  auto train = [lambda = cfg_.reid.lambda](reid::SampleSet set) -> std::shared_ptr<const reid::RidgeClassifier> {
    auto next = std::make_shared<reid::RidgeClassifier>(lambda);
    if (next->train(set) != reid::TrainStatus::trained) return nullptr;
    return next;
  };
  if (cfg_.async_training) {
    pending_ = std::async(std::launch::async, train, samples_);
  } else {
    std::promise<std::shared_ptr<const reid::RidgeClassifier>> done;
    done.set_value(train(samples_));
    pending_ = done.get_future();
  }
}

FrameOutput FollowPipeline::process(const FrameRecord& frame) {
  // Frame boundary: weights trained on the previous frame become visible now.
  publish_pending_classifier();

  geometry::Calibration calib = calibration_;
  const geometry::Pose2D robot = frame.robot_pose.value_or(geometry::Pose2D{});
  if (frame.robot_pose) geometry::set_robot_pose(calib.extrinsics, robot);

  tracking::DetectionSet dets;
  dets.frame_index = frame.frame_index;
  dets.timestamp = frame.timestamp;
  dets.boxes.reserve(frame.detections.size());
  for (const auto& d : frame.detections) dets.boxes.push_back(d.box);
  const tracking::StepResult step = tracker_.step(dets, calib);

  FrameOutput out;
  out.frame_index = frame.frame_index;
  out.timestamp = frame.timestamp;
  for (const auto& a : step.associations) {
    const tracking::TrackState* t = tracker_.find(a.track_id);
    if (t == nullptr) continue;
    TrackReport r;
    r.id = a.track_id;
    r.position = t->position();
    r.box = a.box;
    r.detection_index = a.detection_index;
    r.confirmed = a.confirmed;
    r.person_id = frame.detections[a.detection_index].person_id;
    out.tracks.push_back(r);
  }
  if (!cfg_.reid_enabled) return out;

  std::map<TrackId, Descriptor> descriptors;
  std::set<TrackId> visible;
  for (const auto& r : out.tracks) {
    if (!r.confirmed) continue;
    const auto& det = frame.detections[r.detection_index];
    if (!det.descriptor) {
      throw Error(ErrorCategory::invalid_argument,
                  "frame " + std::to_string(frame.frame_index) + ": detection " +
                      std::to_string(r.detection_index) + " has no descriptor but re-identification is enabled");
    }
    descriptors.emplace(r.id, extractor_->extract(reid::ExtractorInput{det.descriptor, std::nullopt}));
    visible.insert(r.id);
  }

  // One immutable snapshot scores the whole frame.
  const std::shared_ptr<const reid::RidgeClassifier> snapshot = classifier_;
  std::map<TrackId, double> scores;
  if (snapshot->trained()) {
    for (const auto& [id, d] : descriptors) scores[id] = snapshot->score(d);
  }
  for (auto& r : out.tracks) {
    if (const auto it = scores.find(r.id); it != scores.end()) r.score = it->second;
  }

  const auto report_of = [&](TrackId id) -> const TrackReport& {
    return *std::find_if(out.tracks.begin(), out.tracks.end(), [id](const TrackReport& r) { return r.id == id; });
  };

  std::optional<TrackId> reported;
  if (follower_.mode == FollowMode::reid && !snapshot->trained()) {
    std::optional<TrackId> nearest;
    double best = std::numeric_limits<double>::infinity();
    for (TrackId id : visible) {
      const Eigen::Vector2d p = report_of(id).position;
      const double range = std::hypot(p.x() - robot.x, p.y() - robot.y);
      if (range < best) {
        best = range;
        nearest = id;
      }
    }
    if (nearest) {
      follower_ = reid::FollowerState{FollowMode::following, nearest, {}};
      reported = nearest;
    }
  } else {
    const reid::StateMachineOutput sm = reid::step_state_machine(follower_, scores, visible, cfg_.reid);
    follower_ = sm.state;
    reported = sm.reported_target;
    if (sm.entered_reid) controller_state_ = control::reset(controller_state_);
  }

  out.mode = follower_.mode;
  if (reported) {
    const TrackReport& target = report_of(*reported);
    out.target = *reported;
    out.target_box = target.box;
    out.target_person = target.person_id;
    out.target_world = target.position;

    // Training samples: the target plus the nearest other people in the image.
    std::vector<reid::AppearanceSample> batch;
    batch.push_back({descriptors.at(*reported), 1, frame.frame_index, *reported});
    std::vector<std::pair<double, TrackId>> others;
    const Eigen::Vector2d c(target.box.center_u(), target.box.center_v());
    for (TrackId id : visible) {
      if (id == *reported) continue;
      const auto& b = report_of(id).box;
      others.emplace_back((Eigen::Vector2d(b.center_u(), b.center_v()) - c).norm(), id);
    }
    std::sort(others.begin(), others.end());
    const auto n_neg = std::min<std::size_t>(others.size(), static_cast<std::size_t>(cfg_.reid.max_negatives));
    for (std::size_t k = 0; k < n_neg; ++k) {
      batch.push_back({descriptors.at(others[k].second), 0, frame.frame_index, others[k].second});
    }
    samples_.add(batch);

    ++frames_following_;
    if (frames_following_ % cfg_.reid.retrain_period == 0 && samples_.version() != trained_version_) {
      schedule_training();
    }

    if (cfg_.controller_enabled) {
      const double cy = std::cos(robot.yaw), sy = std::sin(robot.yaw);
      const Eigen::Vector2d d = target.position - Eigen::Vector2d(robot.x, robot.y);
      const Eigen::Vector2d rel(cy * d.x() + sy * d.y(), -sy * d.x() + cy * d.y());
      auto [cmd, next] = control::compute_command(rel, step.dt, cfg_.controller, controller_state_);
      controller_state_ = next;
      out.command = cmd;
    }
  }
  out.classifier_trained = snapshot->trained();

  if (!cfg_.async_training) publish_pending_classifier();
  return out;
}

}  // namespace mpf::eval
