#pragma once

// Independent reference implementations used as test oracles. None of these call into
// the code under test beyond plain data types.

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "mpf/geometry.hpp"

namespace oracle {

inline Eigen::Matrix3d random_rotation(std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  Eigen::Quaterniond q(n(rng), n(rng), n(rng), n(rng));
  q.normalize();
  return q.toRotationMatrix();
}

inline mpf::geometry::Extrinsics random_extrinsics(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  mpf::geometry::Extrinsics e;
  e.R_world_robot = random_rotation(rng);
  e.R_robot_cam = random_rotation(rng);
  e.t_world_robot = Eigen::Vector3d(u(rng), u(rng), u(rng));
  e.t_robot_cam = Eigen::Vector3d(u(rng), u(rng), u(rng));
  return e;
}

/// The observation the linear model is supposed to reproduce, computed by pushing the
/// point (x, y, 0) through the full rigid chain and removing the translation terms:
///   X^c - t_rc.x - (R_rc t_wr).x   and   Z^c - t_rc.z - (R_rc t_wr).z
inline Eigen::Vector2d rearranged_observation(const mpf::geometry::Extrinsics& e, double x, double y) {
  const Eigen::Vector3d p(x, y, 0.0);
  const Eigen::Vector3d robot = e.R_world_robot * p + e.t_world_robot;
  const Eigen::Vector3d cam = e.R_robot_cam * robot + e.t_robot_cam;
  const Eigen::Vector3d shift = e.R_robot_cam * e.t_world_robot;
  return {cam.x() - e.t_robot_cam.x() - shift.x(), cam.z() - e.t_robot_cam.z() - shift.z()};
}

/// Pinhole box of a person centred at camera point `cam` with apparent width r.
inline mpf::geometry::BoundingBox pinhole_box(const Eigen::Vector3d& cam, double r, double fx, double cx) {
  const double uc = fx * cam.x() / cam.z() + cx;
  const double w = fx * r / cam.z();
  return {uc - 0.5 * w, 100.0, uc + 0.5 * w, 400.0};
}

inline double box_iou(const mpf::geometry::BoundingBox& a, const mpf::geometry::BoundingBox& b) {
  const double iw = std::max(0.0, std::min(a.u_br, b.u_br) - std::max(a.u_tl, b.u_tl));
  const double ih = std::max(0.0, std::min(a.v_br, b.v_br) - std::max(a.v_tl, b.v_tl));
  const double inter = iw * ih;
  const double ua = (a.u_br - a.u_tl) * (a.v_br - a.v_tl) + (b.u_br - b.u_tl) * (b.v_br - b.v_tl) - inter;
  return ua > 0.0 ? inter / ua : 0.0;
}

/// Keep box i iff max_{j != i} IoU(i, j) < delta.
inline std::vector<std::size_t> brute_force_overlap_filter(const std::vector<mpf::geometry::BoundingBox>& boxes,
                                                           double delta) {
  std::vector<std::size_t> keep;
  for (std::size_t i = 0; i < boxes.size(); ++i) {
    double worst = 0.0;
    for (std::size_t j = 0; j < boxes.size(); ++j) {
      if (i != j) worst = std::max(worst, box_iou(boxes[i], boxes[j]));
    }
    if (worst < delta) keep.push_back(i);
  }
  return keep;
}

/// Minimum total cost over all injective maps of the smaller side into the larger,
/// summed in row order.
inline double brute_force_assignment_cost(const Eigen::MatrixXd& cost) {
  const bool transposed = cost.rows() > cost.cols();
  const Eigen::MatrixXd c = transposed ? Eigen::MatrixXd(cost.transpose()) : cost;
  std::vector<int> cols(static_cast<std::size_t>(c.cols()));
  std::iota(cols.begin(), cols.end(), 0);
  double best = std::numeric_limits<double>::infinity();
  do {
    std::vector<int> row_to_col(static_cast<std::size_t>(c.rows()));
    for (Eigen::Index i = 0; i < c.rows(); ++i) row_to_col[static_cast<std::size_t>(i)] = cols[static_cast<std::size_t>(i)];
    // sum in the row order of the original orientation
    double sum = 0.0;
    if (!transposed) {
      for (Eigen::Index i = 0; i < c.rows(); ++i) sum += c(i, row_to_col[static_cast<std::size_t>(i)]);
    } else {
      std::vector<int> orig(static_cast<std::size_t>(cost.rows()), -1);
      for (Eigen::Index i = 0; i < c.rows(); ++i) orig[static_cast<std::size_t>(row_to_col[static_cast<std::size_t>(i)])] = static_cast<int>(i);
      for (Eigen::Index r = 0; r < cost.rows(); ++r) {
        if (orig[static_cast<std::size_t>(r)] >= 0) sum += cost(r, orig[static_cast<std::size_t>(r)]);
      }
    }
    best = std::min(best, sum);
  } while (std::next_permutation(cols.begin(), cols.end()));
  return best;
}

/// Ridge regression with unregularised bias by conjugate gradient on the augmented
/// normal equations [X^T X + diag(lambda,...,lambda,0)] [w; b] = [X^T l], X = [samples^T 1].
inline std::pair<Eigen::VectorXd, double> ridge_conjugate_gradient(const Eigen::MatrixXd& samples,
                                                                   const Eigen::VectorXd& labels, double lambda) {
  const Eigen::Index d = samples.rows(), n = samples.cols();
  Eigen::MatrixXd X(n, d + 1);
  X.leftCols(d) = samples.transpose();
  X.col(d).setOnes();
  Eigen::MatrixXd A = X.transpose() * X;
  A.diagonal().head(d).array() += lambda;
  const Eigen::VectorXd rhs = X.transpose() * labels;

  Eigen::VectorXd x = Eigen::VectorXd::Zero(d + 1);
  Eigen::VectorXd r = rhs - A * x;
  Eigen::VectorXd p = r;
  double rs = r.squaredNorm();
  for (int it = 0; it < 100 * (d + 1) && std::sqrt(rs) > 1e-14; ++it) {
    const Eigen::VectorXd Ap = A * p;
    const double alpha = rs / p.dot(Ap);
    x += alpha * p;
    r -= alpha * Ap;
    const double rs_new = r.squaredNorm();
    p = r + (rs_new / rs) * p;
    rs = rs_new;
  }
  return {x.head(d), x(d)};
}

/// Same objective by plain gradient descent with a step of 1/L.
inline std::pair<Eigen::VectorXd, double> ridge_gradient_descent(const Eigen::MatrixXd& samples,
                                                                 const Eigen::VectorXd& labels, double lambda,
                                                                 int iterations) {
  const Eigen::Index d = samples.rows(), n = samples.cols();
  Eigen::MatrixXd X(n, d + 1);
  X.leftCols(d) = samples.transpose();
  X.col(d).setOnes();
  Eigen::MatrixXd A = X.transpose() * X;
  A.diagonal().head(d).array() += lambda;
  const Eigen::VectorXd rhs = X.transpose() * labels;
  const double L = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(A).eigenvalues().maxCoeff();
  Eigen::VectorXd x = Eigen::VectorXd::Zero(d + 1);
  for (int it = 0; it < iterations; ++it) x -= (A * x - rhs) / L;
  return {x.head(d), x(d)};
}

}  // namespace oracle
