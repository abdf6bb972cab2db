#pragma once

#include <Eigen/Dense>

#include <vector>

#include "ecbf/tolerances.hpp"

namespace ecbf {

/// Sorted, zero-based row indices into the input polytope.
using IndexSet = std::vector<int>;

/// All k-element subsets of {0..n-1} in lexicographic order.
std::vector<IndexSet> combinations(int n, int k);

/// Rows of `a` selected by `rows`, in order.
Eigen::MatrixXd select_rows(const Eigen::MatrixXd& a, const IndexSet& rows);
Eigen::VectorXd select_rows(const Eigen::VectorXd& v, const IndexSet& rows);

/// True when every singular value exceeds rel_tol times the largest one.
/// An empty matrix counts as full rank; a zero matrix does not.
bool full_row_rank(const Eigen::MatrixXd& a, double rel_tol = tol::kRank);

/// Dense LU solve of k z = rhs followed by `refinements` steps of
/// fixed-precision iterative refinement. Refinement keeps the residual of
/// short rows (e.g. a single active bound) near machine precision even when
/// the solution carries multipliers many orders of magnitude larger.
Eigen::VectorXd solve_refined(const Eigen::MatrixXd& k, const Eigen::VectorXd& rhs,
                              int refinements = 2);

}  // namespace ecbf
