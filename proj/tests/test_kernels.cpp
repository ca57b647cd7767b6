#include <gtest/gtest.h>

#include <random>

#include "mpf/kernels.hpp"

using namespace mpf;

namespace {

Eigen::MatrixXd random_matrix(Eigen::Index r, Eigen::Index c, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n(0.0, 1.0);
  Eigen::MatrixXd m(r, c);
  for (Eigen::Index j = 0; j < c; ++j)
    for (Eigen::Index i = 0; i < r; ++i) m(i, j) = n(rng);
  return m;
}

std::vector<geometry::BoundingBox> random_boxes(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> pos(0.0, 1000.0), size(5.0, 200.0);
  std::vector<geometry::BoundingBox> out;
  for (std::size_t i = 0; i < n; ++i) {
    const double u = pos(rng), v = pos(rng);
    out.push_back({u, v, u + size(rng), v + size(rng)});
  }
  return out;
}

}  // namespace

TEST(Kernels, GramParallelMatchesSerial) {
  for (auto [d, n] : {std::pair{3, 5}, std::pair{512, 64}, std::pair{64, 300}}) {
    const Eigen::MatrixXd x = random_matrix(d, n, 1);
    const Eigen::MatrixXd s = kernels::gram_serial(x);
    EXPECT_NEAR((kernels::gram_parallel(x) - s).cwiseAbs().maxCoeff(), 0.0, 1e-12);
    EXPECT_NEAR((kernels::gram(x) - s).cwiseAbs().maxCoeff(), 0.0, 1e-12);
    EXPECT_NEAR((s - x.transpose() * x).cwiseAbs().maxCoeff(), 0.0, 1e-9);
  }
}

TEST(Kernels, AffineResponseParallelMatchesSerial) {
  const Eigen::MatrixXd x = random_matrix(512, 200, 2);
  const Eigen::VectorXd w = random_matrix(512, 1, 3);
  const Eigen::VectorXd s = kernels::affine_response_serial(x, w, 0.25);
  EXPECT_NEAR((kernels::affine_response_parallel(x, w, 0.25) - s).cwiseAbs().maxCoeff(), 0.0, 1e-12);
  EXPECT_NEAR((s - (x.transpose() * w).array().matrix() - Eigen::VectorXd::Constant(200, 0.25)).cwiseAbs().maxCoeff(),
              0.0, 1e-9);
}

TEST(Kernels, PairwiseIouParallelMatchesSerial) {
  for (std::size_t n : {0u, 1u, 7u, 300u}) {
    const auto boxes = random_boxes(n, 4);
    const Eigen::MatrixXd s = kernels::pairwise_iou_serial(boxes);
    EXPECT_EQ(kernels::pairwise_iou_parallel(boxes), s);
    EXPECT_EQ(kernels::pairwise_iou(boxes), s);
    for (std::size_t i = 0; i < n; ++i) {
      EXPECT_EQ(s(i, i), 0.0);
      for (std::size_t j = 0; j < n; ++j) {
        EXPECT_EQ(s(i, j), s(j, i));
        if (i != j) EXPECT_DOUBLE_EQ(s(i, j), geometry::iou(boxes[i], boxes[j]));
      }
    }
  }
}

TEST(Kernels, SquaredDistancesParallelMatchesSerial) {
  const Eigen::MatrixXd a = random_matrix(2, 400, 5), b = random_matrix(2, 300, 6);
  const Eigen::MatrixXd s = kernels::squared_distances_serial(a, b);
  EXPECT_NEAR((kernels::squared_distances_parallel(a, b) - s).cwiseAbs().maxCoeff(), 0.0, 1e-12);
  EXPECT_NEAR(s(3, 7), (a.col(3) - b.col(7)).squaredNorm(), 1e-12);
}
