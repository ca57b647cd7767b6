#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace mpf::eval {

inline constexpr double kDefaultThresholdPx = 50.0;

/// Per-frame localisation of the target in image space.
struct ReidFrame {
  std::int64_t frame_index = 0;
  std::optional<Eigen::Vector2d> estimated_center;
  std::optional<Eigen::Vector2d> truth_center;
};

/// A frame succeeds when an estimate exists and lies strictly within `threshold` pixels of
/// the ground-truth centre. Frames without ground truth are not evaluated.
bool frame_success(const ReidFrame& frame, double threshold);

/// Precision per threshold over the frames that have ground truth. Missing estimates count
/// as failures. Throws when no frame has ground truth.
std::vector<double> reid_precision(std::span<const ReidFrame> frames, std::span<const double> thresholds);

/// Mean of per-frame success at one threshold; equals reid_precision at that threshold.
double mean_frame_success(std::span<const ReidFrame> frames, double threshold);

/// Thresholds 1..50 px in 1 px steps, as in a precision plot.
std::vector<double> default_thresholds();

struct ReidSummary {
  std::vector<double> thresholds;
  std::vector<double> precision;
  double precision_at_50px = 0.0;
  double mean_precision_over_thresholds = 0.0;
  std::size_t evaluated_frames = 0;
};

ReidSummary summarize_reid(std::span<const ReidFrame> frames);

struct RangeSample {
  double true_range = 0.0;
  double estimated_range = 0.0;
};

struct RangeBin {
  double lower = 0.0;  // inclusive, m
  double upper = 0.0;  // exclusive, m
  std::size_t count = 0;
  double mean_abs_error = 0.0;
  double variance = 0.0;
  double q1 = 0.0;
  double median = 0.0;
  double q3 = 0.0;
};

struct RangeErrorStats {
  std::vector<RangeBin> bins;
};

/// Bins [0.5,1), [1,2), ..., [6,7).
std::vector<std::pair<double, double>> default_range_bins();

/// Statistics of |estimated - true| binned by true range. Samples outside every bin are ignored;
/// empty bins are reported with count 0.
RangeErrorStats range_error_stats(std::span<const RangeSample> samples);

}  // namespace mpf::eval
