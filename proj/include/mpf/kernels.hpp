#pragma once

// Data-parallel inner loops. Every kernel has a plain serial reference that the
// tests compare against; the `_parallel` variants use OpenMP, and the unsuffixed
// entry points pick one by problem size.

#include <span>

#include <Eigen/Dense>

#include "mpf/geometry.hpp"

namespace mpf::kernels {

/// Inner products of the columns of `samples` (d x n, one sample per column): n x n.
Eigen::MatrixXd gram_serial(const Eigen::MatrixXd& samples);
Eigen::MatrixXd gram_parallel(const Eigen::MatrixXd& samples);
Eigen::MatrixXd gram(const Eigen::MatrixXd& samples);

/// w^T x_j + b for every column x_j.
Eigen::VectorXd affine_response_serial(const Eigen::MatrixXd& samples, const Eigen::VectorXd& w,
                                       double b);
Eigen::VectorXd affine_response_parallel(const Eigen::MatrixXd& samples,
                                         const Eigen::VectorXd& w, double b);
Eigen::VectorXd affine_response(const Eigen::MatrixXd& samples, const Eigen::VectorXd& w, double b);

/// Symmetric IoU matrix with a zero diagonal.
Eigen::MatrixXd pairwise_iou_serial(std::span<const geometry::BoundingBox> boxes);
Eigen::MatrixXd pairwise_iou_parallel(std::span<const geometry::BoundingBox> boxes);
Eigen::MatrixXd pairwise_iou(std::span<const geometry::BoundingBox> boxes);

/// ||a_i - b_j||^2 between the columns of `a` (k x n) and `b` (k x m): n x m.
Eigen::MatrixXd squared_distances_serial(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b);
Eigen::MatrixXd squared_distances_parallel(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b);
Eigen::MatrixXd squared_distances(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b);

}  // namespace mpf::kernels
