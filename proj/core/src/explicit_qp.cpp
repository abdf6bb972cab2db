#include "ecbf/explicit_qp.hpp"

#include <algorithm>
#include <cmath>

#include "ecbf/errors.hpp"
#include "kkt_system.hpp"

namespace ecbf {

bool gradient_degenerate(const ConstraintData& cd) {
  const double scale = std::max({1.0, std::abs(cd.lfb), std::abs(cd.alpha_b)});
  return cd.lgb.norm() <= tol::kRank * scale;
}

PointSolution solve_case1(const ConstraintData& cd, const Vec& u_des, int num_limits) {
  if (cd.slack(u_des) < 0.0) {
    throw Error(ErrorCode::kPreconditionViolated, "CBF row is violated at u_des");
  }
  PointSolution sol;
  sol.u_star = u_des;
  sol.mu = Vec::Zero(num_limits);
  sol.case_tag = CaseTag::kCase1;
  return sol;
}

PointSolution solve_case2(const ConstraintData& cd, const Vec& u_des, int num_limits) {
  if (gradient_degenerate(cd)) {
    throw Error(ErrorCode::kDegenerateGradient, "L_gB vanishes; relative degree is not one");
  }
  const Vec g = cd.G();
  PointSolution sol;
  sol.lambda = (cd.F() + g.dot(u_des) + cd.Lambda()) / g.squaredNorm();
  sol.u_star = u_des - g * sol.lambda;
  sol.mu = Vec::Zero(num_limits);
  sol.case_tag = CaseTag::kCase2;
  sol.active_set.cbf_active = true;
  return sol;
}

PointSolution solve_case3(const ConstraintData& cd, const Vec& u_des,
                          const ControlPolytope& limits, const IndexSet& active) {
  if (gradient_degenerate(cd)) {
    throw Error(ErrorCode::kDegenerateGradient, "L_gB vanishes; relative degree is not one");
  }
  if (!full_row_rank(select_rows(limits.A, active))) {
    throw Error(ErrorCode::kRankDeficient, "A_I is not full row rank");
  }
  const ActiveSetLabel label{true, active};
  PointSolution sol;
  detail::assign(sol, detail::solve_active_set(cd, u_des, limits, label, std::nullopt), label);
  return sol;
}

ExplicitController::ExplicitController(const ProblemSpec& spec) : spec_(&spec) {
  const int m = spec.input_dim();
  candidates_ = detail::cbf_candidate_sets(spec.limits, m - 1);
  limit_only_ = detail::cbf_candidate_sets(spec.limits, m);
}

PointSolution ExplicitController::solve(const Vec& x) const {
  return solve(lie_derivatives(*spec_, x), spec_->u_des(x));
}

PointSolution ExplicitController::solve(const ConstraintData& cd, const Vec& u_des) const {
  const auto& limits = spec_->limits;
  const int p = limits.rows();
  const bool nominal_admissible = limits.contains(u_des, tol::kExplicitPrimal);

  if (nominal_admissible && cd.slack(u_des) >= 0.0) return solve_case1(cd, u_des, p);

  if (!gradient_degenerate(cd)) {
    PointSolution c2 = solve_case2(cd, u_des, p);
    if (c2.lambda >= -tol::kExplicitDual && limits.contains(c2.u_star, tol::kExplicitPrimal)) {
      return c2;
    }
    for (const auto& set : candidates_) {
      const ActiveSetLabel label{true, set};
      detail::KktSolve kkt;
      try {
        kkt = detail::solve_active_set(cd, u_des, limits, label, std::nullopt);
      } catch (const Error&) {
        continue;
      }
      if (detail::kkt_consistent(cd, limits, label, kkt, tol::kExplicitDual,
                                 tol::kExplicitPrimal)) {
        PointSolution sol;
        detail::assign(sol, kkt, label);
        return sol;
      }
    }
  } else if (cd.slack(u_des) < 0.0 && nominal_admissible) {
    throw Error(ErrorCode::kDegenerateGradient,
                "CBF row violated at u_des and L_gB vanishes; no input can restore it");
  }

  if (!nominal_admissible) {
    for (const auto& set : limit_only_) {
      const ActiveSetLabel label{false, set};
      detail::KktSolve kkt;
      try {
        kkt = detail::solve_active_set(cd, u_des, limits, label, std::nullopt);
      } catch (const Error&) {
        continue;
      }
      if (detail::kkt_consistent(cd, limits, label, kkt, tol::kExplicitDual,
                                 tol::kExplicitPrimal)) {
        PointSolution sol;
        detail::assign(sol, kkt, label);
        return sol;
      }
    }
  }

  PointSolution sol;
  sol.case_tag = CaseTag::kInfeasible;
  sol.u_star = Vec::Constant(u_des.size(), std::numeric_limits<double>::quiet_NaN());
  sol.mu = Vec::Zero(p);
  sol.lambda = std::numeric_limits<double>::quiet_NaN();
  detail::attach_certificate(sol, cd, limits);
  sol.reason = sol.has_certificate
                   ? "max over U of L_fB + L_gB u + alpha(B) is " + std::to_string(sol.certificate)
                   : "no critical region admits a KKT point";
  return sol;
}

PointSolution classify_and_solve(const ProblemSpec& spec, const Vec& x) {
  return ExplicitController(spec).solve(x);
}

double kkt_residual(const ProblemSpec& spec, const Vec& x, const PointSolution& sol) {
  return detail::kkt_residual(lie_derivatives(spec, x), spec.u_des(x), spec.limits, sol,
                              std::nullopt);
}

double kkt_residual_absolute(const ProblemSpec& spec, const Vec& x, const PointSolution& sol) {
  return detail::kkt_residual_absolute(lie_derivatives(spec, x), spec.u_des(x), spec.limits,
                                       sol, std::nullopt);
}

}  // namespace ecbf
