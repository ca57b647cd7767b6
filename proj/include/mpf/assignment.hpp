#pragma once

#include <vector>

#include <Eigen/Dense>

namespace mpf::tracking {

/// Exact minimum-cost one-to-one assignment on a rectangular cost matrix
/// (Hungarian method with row/column potentials, O(n^2 m)).
///
/// Returns, for every row, the assigned column or -1. min(rows, cols) pairs are
/// always assigned. Costs must be finite.
std::vector<int> solve_assignment(const Eigen::MatrixXd& cost);

/// Sum of cost(i, row_to_col[i]) over assigned rows, accumulated in row order.
double assignment_cost(const Eigen::MatrixXd& cost, const std::vector<int>& row_to_col);

}  // namespace mpf::tracking
