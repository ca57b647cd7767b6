#include "mpf/tracker.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "mpf/assignment.hpp"
#include "mpf/errors.hpp"
#include "mpf/kernels.hpp"

namespace mpf::tracking {

using geometry::BoundingBox;
using geometry::ObservationModel;
using geometry::ProcessedMeasurement;

void TrackerConfig::validate() const {
  if (!(delta_iou >= 0.0 && delta_iou <= 1.0)) throw SchemaError("tracker.delta_iou", "must be in [0, 1]");
  if (!(process_noise_pos > 0.0)) throw SchemaError("tracker.process_noise_pos", "must be > 0");
  if (!(process_noise_vel > 0.0)) throw SchemaError("tracker.process_noise_vel", "must be > 0");
  if (!(measurement_noise > 0.0)) throw SchemaError("tracker.measurement_noise", "must be > 0");
  if (!(gate_distance > 0.0)) throw SchemaError("tracker.gate_distance", "must be > 0");
  if (max_missed < 0) throw SchemaError("tracker.max_missed", "must be >= 0");
  if (!(body_radius > 0.0)) throw SchemaError("tracker.body_radius", "must be > 0");
  if (confirm_hits < 1) throw SchemaError("tracker.confirm_hits", "must be >= 1");
  if (!(init_pos_std > 0.0)) throw SchemaError("tracker.init_pos_std", "must be > 0");
  if (!(init_vel_std > 0.0)) throw SchemaError("tracker.init_vel_std", "must be > 0");
  if (!(default_dt > 0.0)) throw SchemaError("tracker.default_dt", "must be > 0");
}

std::vector<std::size_t> filter_overlap_indices(std::span<const BoundingBox> boxes, double delta_iou) {
  const Eigen::MatrixXd overlap = kernels::pairwise_iou(boxes);
  std::vector<std::size_t> keep;
  keep.reserve(boxes.size());
  for (std::size_t i = 0; i < boxes.size(); ++i) {
    const auto row = static_cast<Eigen::Index>(i);
    const double worst = boxes.size() > 1 ? overlap.row(row).maxCoeff() : 0.0;
    if (worst < delta_iou) keep.push_back(i);
  }
  return keep;
}

DetectionSet filter_overlaps(const DetectionSet& dets, double delta_iou) {
  DetectionSet out;
  out.frame_index = dets.frame_index;
  out.timestamp = dets.timestamp;
  for (std::size_t i : filter_overlap_indices(dets.boxes, delta_iou)) out.boxes.push_back(dets.boxes[i]);
  return out;
}

TrackState predict(const TrackState& track, double dt, const TrackerConfig& cfg) {
  if (!(dt > 0.0)) throw Error(ErrorCategory::invalid_argument, "predict: dt must be > 0");

  Eigen::Matrix4d F = Eigen::Matrix4d::Identity();
  F(0, 2) = dt;
  F(1, 3) = dt;

  const double qp = cfg.process_noise_pos * cfg.process_noise_pos * dt;
  const double qv = cfg.process_noise_vel * cfg.process_noise_vel * dt;
  const Eigen::Vector4d q(qp, qp, qv, qv);

  TrackState out = track;
  out.s = F * track.s;
  out.P = F * track.P * F.transpose();
  out.P.diagonal() += q;
  out.P = 0.5 * (out.P + out.P.transpose());
  return out;
}

Association associate(std::span<const TrackState> tracks,
                      std::span<const ProcessedMeasurement> measurements,
                      const ObservationModel& model, double gate) {
  Association result;
  if (tracks.empty() || measurements.empty()) {
    for (std::size_t i = 0; i < tracks.size(); ++i) result.unmatched_tracks.push_back(i);
    for (std::size_t j = 0; j < measurements.size(); ++j) result.unmatched_measurements.push_back(j);
    return result;
  }

  Eigen::MatrixXd expected(2, static_cast<Eigen::Index>(tracks.size()));
  for (std::size_t i = 0; i < tracks.size(); ++i) {
    expected.col(static_cast<Eigen::Index>(i)) = model.expected(tracks[i].s);
  }
  Eigen::MatrixXd observed(2, static_cast<Eigen::Index>(measurements.size()));
  for (std::size_t j = 0; j < measurements.size(); ++j) {
    observed.col(static_cast<Eigen::Index>(j)) = measurements[j].y;
  }
  Eigen::MatrixXd cost = kernels::squared_distances(expected, observed);
  // Invalid states would poison the solver; push them out of reach of the gate instead.
  const double gate_sq = gate * gate;
  for (Eigen::Index i = 0; i < cost.rows(); ++i) {
    for (Eigen::Index j = 0; j < cost.cols(); ++j) {
      if (!std::isfinite(cost(i, j))) cost(i, j) = 1e12 + gate_sq;
    }
  }

  const std::vector<int> row_to_col = solve_assignment(cost);
  std::vector<char> measurement_used(measurements.size(), 0);
  for (std::size_t i = 0; i < tracks.size(); ++i) {
    const int j = row_to_col[i];
    if (j >= 0 && cost(static_cast<Eigen::Index>(i), j) <= gate_sq) {
      result.pairs.emplace_back(i, static_cast<std::size_t>(j));
      result.pair_costs.push_back(cost(static_cast<Eigen::Index>(i), j));
      measurement_used[static_cast<std::size_t>(j)] = 1;
    } else {
      result.unmatched_tracks.push_back(i);
    }
  }
  for (std::size_t j = 0; j < measurements.size(); ++j) {
    if (!measurement_used[j]) result.unmatched_measurements.push_back(j);
  }
  return result;
}

TrackState update(const TrackState& track, const ProcessedMeasurement& y,
                  const ObservationModel& model, const Eigen::Matrix2d& R) {
  TrackState out = track;
  const Eigen::Vector2d innovation = y.y - model.H * track.s;
  if (!innovation.allFinite()) {
    out.valid = false;
    return out;
  }
  const Eigen::Matrix2d S = model.H * track.P * model.H.transpose() + R;
  const Eigen::Matrix<double, 4, 2> K = track.P * model.H.transpose() * S.inverse();
  const Eigen::Matrix4d I_KH = Eigen::Matrix4d::Identity() - K * model.H;

  out.s = track.s + K * innovation;
  out.P = I_KH * track.P * I_KH.transpose() + K * R * K.transpose();
  out.P = 0.5 * (out.P + out.P.transpose());
  if (!out.s.allFinite() || !out.P.allFinite()) out.valid = false;
  return out;
}

Tracker::Tracker(TrackerConfig cfg) : cfg_(cfg) { cfg_.validate(); }

const TrackState* Tracker::find(TrackId id) const {
  const auto it = std::find_if(tracks_.begin(), tracks_.end(),
                               [id](const TrackState& t) { return t.id == id; });
  return it == tracks_.end() ? nullptr : &*it;
}

TrackState Tracker::birth(const ProcessedMeasurement& y, const ObservationModel& model,
                          const BoundingBox& box) {
  TrackState t;
  t.id = next_id_++;
  t.s.head<2>() = model.position_from(y);
  t.s.tail<2>().setZero();
  const double pv = cfg_.init_pos_std * cfg_.init_pos_std;
  const double vv = cfg_.init_vel_std * cfg_.init_vel_std;
  t.P = Eigen::Vector4d(pv, pv, vv, vv).asDiagonal();
  t.hits = 1;
  t.confirmed = cfg_.confirm_hits <= 1;
  t.last_box = box;
  return t;
}

StepResult Tracker::step(const DetectionSet& dets, const geometry::Calibration& calib) {
  if (last_frame_ && dets.frame_index <= *last_frame_) {
    throw Error(ErrorCategory::invalid_argument,
                "frame_index must increase strictly (got " + std::to_string(dets.frame_index) +
                    " after " + std::to_string(*last_frame_) + ")");
  }

  StepResult result;
  double dt = cfg_.default_dt;
  if (dets.timestamp && last_timestamp_ && *dets.timestamp > *last_timestamp_) {
    dt = *dets.timestamp - *last_timestamp_;
  }
  result.dt = dt;
  last_frame_ = dets.frame_index;
  if (dets.timestamp) last_timestamp_ = dets.timestamp;

  // 1. overlap filter
  const std::vector<std::size_t> kept = filter_overlap_indices(dets.boxes, cfg_.delta_iou);
  {
    std::size_t k = 0;
    for (std::size_t i = 0; i < dets.boxes.size(); ++i) {
      if (k < kept.size() && kept[k] == i) {
        ++k;
      } else {
        result.suppressed.push_back(i);
      }
    }
  }

  // 2. processed measurements; a bad detection is dropped, the frame continues
  std::vector<ProcessedMeasurement> measurements;
  std::vector<std::size_t> source;
  for (std::size_t i : kept) {
    try {
      measurements.push_back(geometry::process_measurement(dets.boxes[i], calib.intrinsics,
                                                           calib.extrinsics, cfg_.body_radius));
      source.push_back(i);
    } catch (const InvalidDetection&) {
      result.dropped.push_back(i);
    }
  }

  // 3. predict
  for (auto& t : tracks_) {
    t = predict(t, dt, cfg_);
    ++t.age;
  }

  // 4. associate, 5. update
  const ObservationModel model = geometry::build_observation_model(calib.extrinsics);
  const Association assoc = associate(tracks_, measurements, model, cfg_.gate_distance);
  const double r2 = cfg_.measurement_noise * cfg_.measurement_noise;
  const Eigen::Matrix2d R = Eigen::Vector2d(r2, r2).asDiagonal();

  for (std::size_t k = 0; k < assoc.pairs.size(); ++k) {
    const auto [ti, mj] = assoc.pairs[k];
    TrackState& t = tracks_[ti];
    t = update(t, measurements[mj], model, R);
    t.missed = 0;
    ++t.hits;
    if (t.hits >= cfg_.confirm_hits) t.confirmed = true;
    t.last_box = dets.boxes[source[mj]];
    if (t.valid) result.associations.push_back({t.id, source[mj], *t.last_box, t.confirmed});
  }
  for (std::size_t ti : assoc.unmatched_tracks) {
    ++tracks_[ti].missed;
    tracks_[ti].last_box.reset();
  }

  // 6. death: invalid, stale, or tentative tracks that missed
  std::erase_if(tracks_, [&](const TrackState& t) {
    const bool dead = !t.valid || t.missed > cfg_.max_missed || (!t.confirmed && t.missed > 0);
    if (dead) result.removed.push_back(t.id);
    return dead;
  });

  // 7. birth
  for (std::size_t mj : assoc.unmatched_measurements) {
    TrackState t = birth(measurements[mj], model, dets.boxes[source[mj]]);
    result.born.push_back(t.id);
    result.associations.push_back({t.id, source[mj], dets.boxes[source[mj]], t.confirmed});
    tracks_.push_back(std::move(t));
  }

  std::sort(result.associations.begin(), result.associations.end(),
            [](const TrackBox& a, const TrackBox& b) { return a.track_id < b.track_id; });
  return result;
}

}  // namespace mpf::tracking
