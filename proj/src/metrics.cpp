#include "mpf/metrics.hpp"

#include <algorithm>
#include <cmath>

#include "mpf/errors.hpp"

namespace mpf::eval {

namespace {

// Linear interpolation between order statistics (type 7).
double quantile(const std::vector<double>& sorted, double q) {
  if (sorted.empty()) return 0.0;
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

}  // namespace

bool frame_success(const ReidFrame& frame, double threshold) {
  if (!frame.truth_center || !frame.estimated_center) return false;
  return (*frame.estimated_center - *frame.truth_center).norm() < threshold;
}

std::vector<double> reid_precision(std::span<const ReidFrame> frames, std::span<const double> thresholds) {
  std::size_t evaluated = 0;
  std::vector<std::size_t> hits(thresholds.size(), 0);
  for (const auto& f : frames) {
    if (!f.truth_center) continue;
    ++evaluated;
    for (std::size_t k = 0; k < thresholds.size(); ++k) hits[k] += frame_success(f, thresholds[k]) ? 1 : 0;
  }
  if (evaluated == 0) throw Error(ErrorCategory::invalid_argument, "reid_precision: no frame has ground truth");

  std::vector<double> precision(thresholds.size());
  for (std::size_t k = 0; k < thresholds.size(); ++k) {
    precision[k] = static_cast<double>(hits[k]) / static_cast<double>(evaluated);
  }
  return precision;
}

double mean_frame_success(std::span<const ReidFrame> frames, double threshold) {
  double sum = 0.0;
  std::size_t n = 0;
  for (const auto& f : frames) {
    if (!f.truth_center) continue;
    sum += frame_success(f, threshold) ? 1.0 : 0.0;
    ++n;
  }
  if (n == 0) throw Error(ErrorCategory::invalid_argument, "mean_frame_success: no frame has ground truth");
  return sum / static_cast<double>(n);
}

std::vector<double> default_thresholds() {
  std::vector<double> t;
  for (int px = 1; px <= 50; ++px) t.push_back(px);
  return t;
}

ReidSummary summarize_reid(std::span<const ReidFrame> frames) {
  ReidSummary s;
  s.thresholds = default_thresholds();
  s.precision = reid_precision(frames, s.thresholds);
  s.precision_at_50px = s.precision.back();
  double sum = 0.0;
  for (double p : s.precision) sum += p;
  s.mean_precision_over_thresholds = sum / static_cast<double>(s.precision.size());
  s.evaluated_frames = static_cast<std::size_t>(
      std::count_if(frames.begin(), frames.end(), [](const ReidFrame& f) { return f.truth_center.has_value(); }));
  return s;
}

std::vector<std::pair<double, double>> default_range_bins() {
  std::vector<std::pair<double, double>> bins{{0.5, 1.0}};
  for (int m = 1; m < 7; ++m) bins.emplace_back(m, m + 1);
  return bins;
}

RangeErrorStats range_error_stats(std::span<const RangeSample> samples) {
  RangeErrorStats stats;
  for (const auto& [lo, hi] : default_range_bins()) {
    std::vector<double> errors;
    for (const auto& s : samples) {
      if (s.true_range >= lo && s.true_range < hi) errors.push_back(std::abs(s.estimated_range - s.true_range));
    }
    RangeBin bin;
    bin.lower = lo;
    bin.upper = hi;
    bin.count = errors.size();
    if (!errors.empty()) {
      double sum = 0.0;
      for (double e : errors) sum += e;
      bin.mean_abs_error = sum / static_cast<double>(errors.size());
      double var = 0.0;
      for (double e : errors) var += (e - bin.mean_abs_error) * (e - bin.mean_abs_error);
      bin.variance = var / static_cast<double>(errors.size());
      std::sort(errors.begin(), errors.end());
      bin.q1 = quantile(errors, 0.25);
      bin.median = quantile(errors, 0.5);
      bin.q3 = quantile(errors, 0.75);
    }
    stats.bins.push_back(bin);
  }
  return stats;
}

}  // namespace mpf::eval
