#include <gtest/gtest.h>

#include <random>

#include "mpf/errors.hpp"
#include "mpf/metrics.hpp"

using namespace mpf;
using namespace mpf::eval;

namespace {

ReidFrame frame(std::int64_t k, std::optional<Eigen::Vector2d> est, std::optional<Eigen::Vector2d> truth) {
  return {k, est, truth};
}

}  // namespace

TEST(Precision, SevenOfTen) {
  std::vector<ReidFrame> f;
  for (int k = 0; k < 7; ++k) f.push_back(frame(k, Eigen::Vector2d(100, 100), Eigen::Vector2d(110, 100)));
  f.push_back(frame(7, Eigen::Vector2d(100, 100), Eigen::Vector2d(200, 100)));  // 100 px off
  f.push_back(frame(8, std::nullopt, Eigen::Vector2d(0, 0)));                   // no estimate
  f.push_back(frame(9, Eigen::Vector2d(0, 0), Eigen::Vector2d(30, 40)));         // exactly 50 px: not strictly within
  f.push_back(frame(10, Eigen::Vector2d(0, 0), std::nullopt));                   // not evaluated
  const double t[] = {50.0};
  EXPECT_DOUBLE_EQ(reid_precision(f, t)[0], 0.7);
  EXPECT_DOUBLE_EQ(mean_frame_success(f, 50.0), 0.7);
  const auto s = summarize_reid(f);
  EXPECT_EQ(s.evaluated_frames, 10u);
  EXPECT_DOUBLE_EQ(s.precision_at_50px, 0.7);
  // 7 frames at 10 px succeed from threshold 11 on
  EXPECT_DOUBLE_EQ(s.precision[9], 0.0);
  EXPECT_DOUBLE_EQ(s.precision[10], 0.7);
}

TEST(Precision, MonotoneInThreshold) {
  std::mt19937_64 rng(2);
  std::normal_distribution<double> n(0.0, 30.0);
  std::vector<ReidFrame> f;
  for (int k = 0; k < 300; ++k) {
    const Eigen::Vector2d truth(320, 240);
    if (k % 13 == 0) f.push_back(frame(k, std::nullopt, truth));
    else f.push_back(frame(k, truth + Eigen::Vector2d(n(rng), n(rng)), truth));
  }
  const auto s = summarize_reid(f);
  for (std::size_t k = 1; k < s.precision.size(); ++k) EXPECT_GE(s.precision[k], s.precision[k - 1]);
  for (std::size_t k = 0; k < s.thresholds.size(); ++k) {
    EXPECT_DOUBLE_EQ(s.precision[k], mean_frame_success(f, s.thresholds[k]));
  }
  double sum = 0.0;
  for (double p : s.precision) sum += p;
  EXPECT_DOUBLE_EQ(s.mean_precision_over_thresholds, sum / 50.0);
}

TEST(Precision, NoGroundTruthThrows) {
  std::vector<ReidFrame> f{frame(0, Eigen::Vector2d(1, 1), std::nullopt)};
  const double t[] = {50.0};
  EXPECT_THROW(reid_precision(f, t), Error);
  EXPECT_THROW(summarize_reid(std::vector<ReidFrame>{}), Error);
}

TEST(RangeStats, PerfectEstimates) {
  std::vector<RangeSample> s;
  for (double r = 0.5; r < 7.0; r += 0.01) s.push_back({r, r});
  const auto st = range_error_stats(s);
  ASSERT_EQ(st.bins.size(), 7u);
  for (const auto& b : st.bins) {
    EXPECT_GT(b.count, 0u);
    EXPECT_EQ(b.mean_abs_error, 0.0);
    EXPECT_EQ(b.variance, 0.0);
    EXPECT_EQ(b.median, 0.0);
  }
}

TEST(RangeStats, ConstantBias) {
  std::vector<RangeSample> s;
  for (double r = 0.5; r < 7.0; r += 0.05) s.push_back({r, r + 0.1});
  s.push_back({9.0, 0.0});  // outside every bin
  for (const auto& b : range_error_stats(s).bins) {
    EXPECT_NEAR(b.mean_abs_error, 0.1, 1e-12);
    EXPECT_NEAR(b.variance, 0.0, 1e-20);
    EXPECT_NEAR(b.q1, 0.1, 1e-12);
    EXPECT_NEAR(b.q3, 0.1, 1e-12);
  }
}

TEST(RangeStats, BinEdgesAndQuartiles) {
  std::vector<RangeSample> s{{1.0, 1.1}, {1.5, 1.2}, {1.99, 2.39}, {2.0, 2.0}, {0.4, 5.0}};
  const auto st = range_error_stats(s);
  EXPECT_EQ(st.bins[0].count, 0u);
  EXPECT_EQ(st.bins[1].count, 3u);  // [1, 2)
  EXPECT_EQ(st.bins[2].count, 1u);  // [2, 3)
  EXPECT_NEAR(st.bins[1].median, 0.3, 1e-12);
  EXPECT_NEAR(st.bins[1].q1, 0.2, 1e-12);
  EXPECT_NEAR(st.bins[1].q3, 0.35, 1e-12);
  EXPECT_NEAR(st.bins[1].mean_abs_error, 0.8 / 3.0, 1e-12);
}
