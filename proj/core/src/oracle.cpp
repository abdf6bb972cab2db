#include "ecbf/oracle.hpp"

#include <Eigen/Cholesky>

#include <cmath>
#include <limits>

#include "ecbf/errors.hpp"
#include "ecbf/linalg.hpp"

namespace ecbf {
namespace {

constexpr int kMaxRows = 20;

bool primal_feasible(const DenseQP& qp, const Vec& z, double tol) {
  return qp.M.rows() == 0 || (qp.M * z + qp.v).maxCoeff() <= tol;
}

// Scan every basic solution (d rows held with equality) for a feasible one.
bool has_feasible_vertex(const DenseQP& qp) {
  const int d = static_cast<int>(qp.H.rows());
  const int q = static_cast<int>(qp.M.rows());
  for (const auto& rows : combinations(q, d)) {
    const Mat ms = select_rows(qp.M, rows);
    if (!full_row_rank(ms)) continue;
    const Vec z = ms.fullPivLu().solve(-select_rows(qp.v, rows));
    if (primal_feasible(qp, z, tol::kOraclePrimal)) return true;
  }
  return false;
}

}  // namespace

OracleResult solve_bruteforce(const DenseQP& qp) {
  const int d = static_cast<int>(qp.H.rows());
  const int q = static_cast<int>(qp.M.rows());
  if (q > kMaxRows) {
    throw Error(ErrorCode::kTooManyRows, std::to_string(q) + " rows exceed the enumeration limit");
  }
  if ((qp.H - qp.H.transpose()).lpNorm<Eigen::Infinity>() > 1e-12 ||
      qp.H.llt().info() != Eigen::Success) {
    throw Error(ErrorCode::kPreconditionViolated, "H must be symmetric positive definite");
  }

  OracleResult best;
  best.objective = std::numeric_limits<double>::infinity();
  bool found = false;
  int skipped = 0;

  for (int k = 0; k <= q; ++k) {
    for (const auto& rows : combinations(q, k)) {
      const Mat ms = select_rows(qp.M, rows);
      if (!full_row_rank(ms)) {
        ++skipped;
        continue;
      }
      Mat kkt = Mat::Zero(d + k, d + k);
      kkt.topLeftCorner(d, d) = qp.H;
      kkt.topRightCorner(d, k) = ms.transpose();
      kkt.bottomLeftCorner(k, d) = ms;
      Vec rhs(d + k);
      rhs.head(d) = -qp.c;
      rhs.tail(k) = -select_rows(qp.v, rows);
      const Vec sol = solve_refined(kkt, rhs);
      if (!sol.allFinite()) {
        ++skipped;
        continue;
      }
      const Vec z = sol.head(d);
      const Vec nu = sol.tail(k);
      if (k > 0 && nu.minCoeff() < -tol::kOracleDual) continue;
      if (!primal_feasible(qp, z, tol::kOraclePrimal)) continue;

      const double obj = 0.5 * z.dot(qp.H * z) + qp.c.dot(z);
      if (!found || obj < best.objective - tol::kOracleObjectiveTie) {
        found = true;
        best.status = OracleStatus::kOptimal;
        best.z = z;
        best.objective = obj;
        best.active = rows;
        best.multipliers = Vec::Zero(q);
        for (int j = 0; j < k; ++j) best.multipliers(rows[j]) = nu(j);
      }
    }
  }
  best.skipped_singular = skipped;
  if (found) return best;

  if (q > 0 && has_feasible_vertex(qp)) {
    best.status = OracleStatus::kNumericalFailure;
    best.certificate = "feasible vertex exists but no subset passed the KKT gates";
  } else {
    best.status = OracleStatus::kInfeasible;
    best.certificate = "no admissible KKT subset and no feasible vertex";
  }
  return best;
}

DenseQP standard_qp(const ProblemSpec& spec, const Vec& x) {
  const ConstraintData cd = lie_derivatives(spec, x);
  const Vec ud = spec.u_des(x);
  const int m = static_cast<int>(ud.size());
  const int p = spec.limits.rows();
  DenseQP qp;
  qp.H = Mat::Identity(m, m);
  qp.c = -ud;
  qp.M.resize(1 + p, m);
  qp.v.resize(1 + p);
  qp.M.row(0) = -cd.lgb.transpose();
  qp.v(0) = -(cd.lfb + cd.alpha_b);
  qp.M.bottomRows(p) = spec.limits.A;
  qp.v.tail(p) = spec.limits.b;
  return qp;
}

DenseQP adaptive_qp(const ProblemSpec& spec, const Vec& x, double p_s) {
  const ConstraintData cd = lie_derivatives(spec, x);
  const Vec ud = spec.u_des(x);
  const int m = static_cast<int>(ud.size());
  const int p = spec.limits.rows();
  DenseQP qp;
  qp.H = Mat::Identity(m + 1, m + 1);
  qp.H(0, 0) = p_s;
  qp.c.resize(m + 1);
  qp.c(0) = -p_s;
  qp.c.tail(m) = -ud;
  qp.M = Mat::Zero(1 + p, m + 1);
  qp.v.resize(1 + p);
  qp.M(0, 0) = -cd.alpha_b;
  qp.M.block(0, 1, 1, m) = -cd.lgb.transpose();
  qp.v(0) = -cd.lfb;
  qp.M.bottomRightCorner(p, m) = spec.limits.A;
  qp.v.tail(p) = spec.limits.b;
  return qp;
}

namespace {

void fill_from_oracle(PointSolution& sol, const OracleResult& r, int offset, int m, int p) {
  sol.u_star = r.z.segment(offset, m);
  sol.lambda = r.multipliers(0);
  sol.mu = r.multipliers.tail(p);
  sol.active_set = {};
  for (int row : r.active) {
    if (row == 0) {
      sol.active_set.cbf_active = true;
    } else {
      sol.active_set.limit_indices.push_back(row - 1);
    }
  }
  if (!sol.active_set.cbf_active && sol.active_set.limit_indices.empty()) {
    sol.case_tag = CaseTag::kCase1;
  } else if (sol.active_set.limit_indices.empty()) {
    sol.case_tag = CaseTag::kCase2;
  } else {
    sol.case_tag = CaseTag::kCase3;
  }
}

void mark_infeasible(PointSolution& sol, const OracleResult& r, CaseTag tag, int m, int p) {
  sol.case_tag = tag;
  sol.u_star = Vec::Constant(m, std::numeric_limits<double>::quiet_NaN());
  sol.lambda = std::numeric_limits<double>::quiet_NaN();
  sol.mu = Vec::Zero(p);
  sol.reason = r.status == OracleStatus::kNumericalFailure ? "oracle numerical failure: " + r.certificate
                                                           : r.certificate;
}

}  // namespace

PointSolution oracle_standard(const ProblemSpec& spec, const Vec& x) {
  const OracleResult r = solve_bruteforce(standard_qp(spec, x));
  const int m = spec.input_dim();
  const int p = spec.limits.rows();
  PointSolution sol;
  if (r.status == OracleStatus::kOptimal) {
    fill_from_oracle(sol, r, 0, m, p);
  } else {
    mark_infeasible(sol, r, CaseTag::kInfeasible, m, p);
  }
  return sol;
}

AdaptiveSolution oracle_adaptive(const ProblemSpec& spec, const Vec& x) {
  return oracle_adaptive(spec, x, spec.p_s);
}

AdaptiveSolution oracle_adaptive(const ProblemSpec& spec, const Vec& x, double p_s) {
  const OracleResult r = solve_bruteforce(adaptive_qp(spec, x, p_s));
  const int m = spec.input_dim();
  const int p = spec.limits.rows();
  AdaptiveSolution sol;
  sol.outside_safe_set = spec.barrier.value(x) < 0.0;
  if (r.status == OracleStatus::kOptimal) {
    fill_from_oracle(sol, r, 1, m, p);
    sol.s_star = r.z(0);
    sol.near_degenerate = std::abs(sol.s_star) > tol::kAdaptiveCap;
  } else {
    const bool degenerate = spec.barrier.alpha(spec.barrier.value(x)) == 0.0;
    mark_infeasible(sol, r, degenerate ? CaseTag::kDegenerateInfeasible : CaseTag::kInfeasible,
                    m, p);
    sol.s_star = std::numeric_limits<double>::infinity();
  }
  return sol;
}

}  // namespace ecbf
