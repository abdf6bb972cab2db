#include "kkt_system.hpp"

#include <algorithm>
#include <cmath>

#include "ecbf/errors.hpp"
#include "ecbf/partition.hpp"

namespace ecbf::detail {

KktSolve solve_active_set(const ConstraintData& cd, const Vec& u_des,
                          const ControlPolytope& limits, const ActiveSetLabel& label,
                          std::optional<double> p_s) {
  const int m = static_cast<int>(u_des.size());
  const int off = p_s ? 1 : 0;  // leading s variable in adaptive mode
  const int nz = m + off;
  const int n_lim = static_cast<int>(label.limit_indices.size());
  const int n_rows = n_lim + (label.cbf_active ? 1 : 0);

  Mat jac = Mat::Zero(n_rows, nz);
  Vec rhs(n_rows);
  int r = 0;
  if (label.cbf_active) {
    if (p_s) jac(r, 0) = cd.Lambda();
    jac.block(r, off, 1, m) = cd.G().transpose();
    // Adaptive: Lambda multiplies s and sits in the Jacobian instead.
    rhs(r) = p_s ? -cd.F() : -(cd.F() + cd.Lambda());
    ++r;
  }
  for (int i : label.limit_indices) {
    jac.block(r, off, 1, m) = limits.A.row(i);
    rhs(r) = -limits.b(i);
    ++r;
  }
  if (!full_row_rank(jac)) {
    throw Error(ErrorCode::kRankDeficient,
                "active-set Jacobian for " + label.str() + " is not full row rank");
  }

  Mat kkt = Mat::Zero(nz + n_rows, nz + n_rows);
  Vec b(nz + n_rows);
  kkt.topLeftCorner(nz, nz).setIdentity();
  if (p_s) kkt(0, 0) = *p_s;
  kkt.topRightCorner(nz, n_rows) = jac.transpose();
  kkt.bottomLeftCorner(n_rows, nz) = jac;
  if (p_s) b(0) = *p_s;
  b.segment(off, m) = u_des;
  b.tail(n_rows) = rhs;

  const Vec sol = solve_refined(kkt, b);
  if (!sol.allFinite()) {
    throw Error(ErrorCode::kRankDeficient, "KKT system for " + label.str() + " is singular");
  }

  KktSolve out;
  out.s = p_s ? sol(0) : 1.0;
  out.u = sol.segment(off, m);
  out.mu = Vec::Zero(limits.rows());
  r = nz;
  if (label.cbf_active) out.lambda = sol(r++);
  for (int i : label.limit_indices) out.mu(i) = sol(r++);
  return out;
}

bool kkt_consistent(const ConstraintData& cd, const ControlPolytope& limits,
                    const ActiveSetLabel& label, const KktSolve& sol, double dual_tol,
                    double primal_tol) {
  if (label.cbf_active) {
    if (sol.lambda < -dual_tol) return false;
  } else if (cd.slack(sol.u, sol.s) < -primal_tol) {
    return false;
  }
  const Vec h = limits.evaluate(sol.u);
  std::size_t k = 0;
  for (int i = 0; i < limits.rows(); ++i) {
    if (k < label.limit_indices.size() && label.limit_indices[k] == i) {
      if (sol.mu(i) < -dual_tol) return false;
      ++k;
    } else if (h(i) > primal_tol) {
      return false;
    }
  }
  return true;
}

namespace {

double max_multiplier(const PointSolution& sol) {
  double mag = std::abs(sol.lambda);
  if (sol.mu.size() > 0) mag = std::max(mag, sol.mu.lpNorm<Eigen::Infinity>());
  return mag;
}

}  // namespace

double kkt_residual_absolute(const ConstraintData& cd, const Vec& u_des,
                             const ControlPolytope& limits, const PointSolution& sol,
                             std::optional<double> p_s) {
  const Vec& u = sol.u_star;
  const Vec mu = sol.mu.size() == limits.rows() ? sol.mu : Vec::Zero(limits.rows());
  const double s = p_s ? sol.s_star : 1.0;

  double res = 0.0;
  auto take = [&res](double v) { res = std::max(res, std::abs(v)); };

  // Stationarity in u and, for the adaptive program, in s.
  const Vec stat = u - u_des + cd.G() * sol.lambda + limits.A.transpose() * mu;
  take(stat.lpNorm<Eigen::Infinity>());
  if (p_s) take(*p_s * s - *p_s + cd.Lambda() * sol.lambda);

  const double g = cd.F() + cd.G().dot(u) + s * cd.Lambda();
  take(std::max(0.0, g));
  take(sol.lambda * g);
  take(std::max(0.0, -sol.lambda));

  const Vec h = limits.evaluate(u);
  for (int i = 0; i < limits.rows(); ++i) {
    take(std::max(0.0, h(i)));
    take(mu(i) * h(i));
    take(std::max(0.0, -mu(i)));
  }
  return res;
}

double kkt_residual(const ConstraintData& cd, const Vec& u_des, const ControlPolytope& limits,
                    const PointSolution& sol, std::optional<double> p_s) {
  return kkt_residual_absolute(cd, u_des, limits, sol, p_s) / std::max(1.0, max_multiplier(sol));
}

void assign(PointSolution& out, const KktSolve& sol, const ActiveSetLabel& label) {
  out.u_star = sol.u;
  out.s_star = sol.s;
  out.lambda = sol.lambda;
  out.mu = sol.mu;
  out.active_set = label;
  if (!label.cbf_active && label.limit_indices.empty()) {
    out.case_tag = CaseTag::kCase1;
  } else if (label.limit_indices.empty()) {
    out.case_tag = CaseTag::kCase2;
  } else {
    out.case_tag = CaseTag::kCase3;
  }
}

std::vector<IndexSet> cbf_candidate_sets(const ControlPolytope& limits, int max_limits) {
  if (limits.rows() == 0 || max_limits <= 0) return {};
  std::vector<IndexSet> sets = prune_rank_deficient(limits, enumerate_active_sets(limits.rows()));
  std::erase_if(sets, [&](const IndexSet& s) { return static_cast<int>(s.size()) > max_limits; });
  return sets;
}

void attach_certificate(PointSolution& out, const ConstraintData& cd,
                        const ControlPolytope& limits, double s) {
  if (auto best = limits.max_linear(cd.lgb, cd.lfb + s * cd.alpha_b)) {
    out.certificate = *best;
    out.has_certificate = true;
  }
}

}  // namespace ecbf::detail
