#include "mpf/kernels.hpp"

#include <cstddef>

namespace mpf::kernels {

namespace {

// Below this many multiply-adds the thread fork costs more than it saves.
constexpr std::size_t kParallelWork = std::size_t{1} << 16;

double column_dot(const Eigen::MatrixXd& m, Eigen::Index i, Eigen::Index j) {
  const double* a = m.col(i).data();
  const double* b = m.col(j).data();
  double acc = 0.0;
  for (Eigen::Index k = 0; k < m.rows(); ++k) acc += a[k] * b[k];
  return acc;
}

}  // namespace

Eigen::MatrixXd gram_serial(const Eigen::MatrixXd& samples) {
  const Eigen::Index n = samples.cols();
  Eigen::MatrixXd g(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j <= i; ++j) {
      g(i, j) = column_dot(samples, i, j);
      g(j, i) = g(i, j);
    }
  }
  return g;
}

Eigen::MatrixXd gram_parallel(const Eigen::MatrixXd& samples) {
  const Eigen::Index n = samples.cols();
  Eigen::MatrixXd g(n, n);
#pragma omp parallel for schedule(dynamic, 4)
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j <= i; ++j) {
      const double v = column_dot(samples, i, j);
      g(i, j) = v;
      g(j, i) = v;
    }
  }
  return g;
}

Eigen::MatrixXd gram(const Eigen::MatrixXd& samples) {
  const auto work = static_cast<std::size_t>(samples.cols() * samples.cols() * samples.rows()) / 2;
  return work >= kParallelWork ? gram_parallel(samples) : gram_serial(samples);
}

Eigen::VectorXd affine_response_serial(const Eigen::MatrixXd& samples, const Eigen::VectorXd& w,
                                       double b) {
  Eigen::VectorXd out(samples.cols());
  for (Eigen::Index j = 0; j < samples.cols(); ++j) {
    double acc = b;
    for (Eigen::Index k = 0; k < samples.rows(); ++k) acc += w(k) * samples(k, j);
    out(j) = acc;
  }
  return out;
}

Eigen::VectorXd affine_response_parallel(const Eigen::MatrixXd& samples,
                                         const Eigen::VectorXd& w, double b) {
  Eigen::VectorXd out(samples.cols());
#pragma omp parallel for
  for (Eigen::Index j = 0; j < samples.cols(); ++j) {
    double acc = b;
    for (Eigen::Index k = 0; k < samples.rows(); ++k) acc += w(k) * samples(k, j);
    out(j) = acc;
  }
  return out;
}

Eigen::VectorXd affine_response(const Eigen::MatrixXd& samples, const Eigen::VectorXd& w, double b) {
  const auto work = static_cast<std::size_t>(samples.cols() * samples.rows());
  return work >= kParallelWork ? affine_response_parallel(samples, w, b)
                               : affine_response_serial(samples, w, b);
}

Eigen::MatrixXd pairwise_iou_serial(std::span<const geometry::BoundingBox> boxes) {
  const auto n = static_cast<Eigen::Index>(boxes.size());
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i + 1; j < n; ++j) {
      m(i, j) = geometry::iou(boxes[i], boxes[j]);
      m(j, i) = m(i, j);
    }
  }
  return m;
}

Eigen::MatrixXd pairwise_iou_parallel(std::span<const geometry::BoundingBox> boxes) {
  const auto n = static_cast<Eigen::Index>(boxes.size());
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(n, n);
#pragma omp parallel for schedule(dynamic, 8)
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i + 1; j < n; ++j) {
      const double v = geometry::iou(boxes[i], boxes[j]);
      m(i, j) = v;
      m(j, i) = v;
    }
  }
  return m;
}

Eigen::MatrixXd pairwise_iou(std::span<const geometry::BoundingBox> boxes) {
  // ~20 flops per pair
  const std::size_t work = boxes.size() * boxes.size() * 10;
  return work >= kParallelWork ? pairwise_iou_parallel(boxes) : pairwise_iou_serial(boxes);
}

Eigen::MatrixXd squared_distances_serial(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  Eigen::MatrixXd d(a.cols(), b.cols());
  for (Eigen::Index i = 0; i < a.cols(); ++i) {
    for (Eigen::Index j = 0; j < b.cols(); ++j) {
      double acc = 0.0;
      for (Eigen::Index k = 0; k < a.rows(); ++k) {
        const double diff = a(k, i) - b(k, j);
        acc += diff * diff;
      }
      d(i, j) = acc;
    }
  }
  return d;
}

Eigen::MatrixXd squared_distances_parallel(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  Eigen::MatrixXd d(a.cols(), b.cols());
#pragma omp parallel for
  for (Eigen::Index i = 0; i < a.cols(); ++i) {
    for (Eigen::Index j = 0; j < b.cols(); ++j) {
      double acc = 0.0;
      for (Eigen::Index k = 0; k < a.rows(); ++k) {
        const double diff = a(k, i) - b(k, j);
        acc += diff * diff;
      }
      d(i, j) = acc;
    }
  }
  return d;
}

Eigen::MatrixXd squared_distances(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  const auto work = static_cast<std::size_t>(a.cols() * b.cols() * a.rows());
  return work >= kParallelWork ? squared_distances_parallel(a, b) : squared_distances_serial(a, b);
}

}  // namespace mpf::kernels
