#include "ecbf/linalg.hpp"

#include <Eigen/SVD>

namespace ecbf {

std::vector<IndexSet> combinations(int n, int k) {
  std::vector<IndexSet> out;
  if (k < 0 || k > n) return out;
  IndexSet idx(k);
  for (int i = 0; i < k; ++i) idx[i] = i;
  while (true) {
    out.push_back(idx);
    int i = k - 1;
    while (i >= 0 && idx[i] == n - k + i) --i;
    if (i < 0) break;
    ++idx[i];
    for (int j = i + 1; j < k; ++j) idx[j] = idx[j - 1] + 1;
  }
  return out;
}

Eigen::MatrixXd select_rows(const Eigen::MatrixXd& a, const IndexSet& rows) {
  Eigen::MatrixXd out(static_cast<Eigen::Index>(rows.size()), a.cols());
  for (std::size_t k = 0; k < rows.size(); ++k) out.row(k) = a.row(rows[k]);
  return out;
}

Eigen::VectorXd select_rows(const Eigen::VectorXd& v, const IndexSet& rows) {
  Eigen::VectorXd out(static_cast<Eigen::Index>(rows.size()));
  for (std::size_t k = 0; k < rows.size(); ++k) out(k) = v(rows[k]);
  return out;
}

bool full_row_rank(const Eigen::MatrixXd& a, double rel_tol) {
  if (a.rows() == 0) return true;
  if (a.rows() > a.cols()) return false;
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(a);
  const auto& sv = svd.singularValues();
  if (sv.size() < a.rows() || sv(0) == 0.0) return false;
  return sv(sv.size() - 1) > rel_tol * sv(0);
}

Eigen::VectorXd solve_refined(const Eigen::MatrixXd& k, const Eigen::VectorXd& rhs,
                              int refinements) {
  const Eigen::FullPivLU<Eigen::MatrixXd> lu(k);
  Eigen::VectorXd z = lu.solve(rhs);
  for (int i = 0; i < refinements && z.allFinite(); ++i) {
    const Eigen::VectorXd r = rhs - k * z;
    z += lu.solve(r);
  }
  return z;
}

}  // namespace ecbf
