#include "ecbf/adaptive_qp.hpp"

#include <cmath>
#include <limits>

#include "ecbf/errors.hpp"
#include "ecbf/explicit_qp.hpp"
#include "kkt_system.hpp"

namespace ecbf {
namespace {

AdaptiveSolution from_kkt(const detail::KktSolve& kkt, const ActiveSetLabel& label) {
  AdaptiveSolution sol;
  detail::assign(sol, kkt, label);
  sol.near_degenerate = std::abs(sol.s_star) > tol::kAdaptiveCap;
  return sol;
}

bool row_degenerate(const ConstraintData& cd) {
  return gradient_degenerate(cd) && cd.alpha_b == 0.0;
}

}  // namespace

AdaptiveSolution ad_solve_case1(const ConstraintData& cd, const Vec& u_des, int num_limits) {
  if (cd.slack(u_des) < 0.0) {
    throw Error(ErrorCode::kPreconditionViolated, "relaxed CBF row is violated at (u_des, 1)");
  }
  AdaptiveSolution sol;
  sol.u_star = u_des;
  sol.mu = Vec::Zero(num_limits);
  sol.s_star = 1.0;
  sol.case_tag = CaseTag::kCase1;
  return sol;
}

AdaptiveSolution ad_solve_case2(const ConstraintData& cd, const Vec& u_des, double p_s,
                                int num_limits) {
  if (row_degenerate(cd)) {
    throw Error(ErrorCode::kDegenerateRow, "L_gB and alpha(B) both vanish");
  }
  ControlPolytope none{Mat::Zero(num_limits, u_des.size()), Vec::Zero(num_limits)};
  const ActiveSetLabel label{true, {}};
  return from_kkt(detail::solve_active_set(cd, u_des, none, label, p_s), label);
}

AdaptiveSolution ad_solve_case3(const ConstraintData& cd, const Vec& u_des,
                                const ControlPolytope& limits, const IndexSet& active,
                                double p_s) {
  if (!full_row_rank(select_rows(limits.A, active))) {
    throw Error(ErrorCode::kRankDeficient, "A_I is not full row rank");
  }
  const ActiveSetLabel label{true, active};
  return from_kkt(detail::solve_active_set(cd, u_des, limits, label, p_s), label);
}

AdaptiveController::AdaptiveController(const ProblemSpec& spec)
    : AdaptiveController(spec, spec.p_s) {}

AdaptiveController::AdaptiveController(const ProblemSpec& spec, double p_s)
    : spec_(&spec), p_s_(p_s), candidates_(detail::cbf_candidate_sets(spec.limits, spec.input_dim())) {}

AdaptiveSolution AdaptiveController::solve(const Vec& x) const {
  return solve(lie_derivatives(*spec_, x), spec_->u_des(x));
}

AdaptiveSolution AdaptiveController::solve(const ConstraintData& cd, const Vec& u_des) const {
  const auto& limits = spec_->limits;
  const int p = limits.rows();
  const bool nominal_admissible = limits.contains(u_des, tol::kExplicitPrimal);

  auto finish = [&](AdaptiveSolution sol) {
    sol.outside_safe_set = cd.b_val < 0.0;
    return sol;
  };

  if (nominal_admissible && cd.slack(u_des) >= 0.0) return finish(ad_solve_case1(cd, u_des, p));

  auto try_label = [&](const ActiveSetLabel& label) -> std::optional<AdaptiveSolution> {
    detail::KktSolve kkt;
    try {
      kkt = detail::solve_active_set(cd, u_des, limits, label, p_s_);
    } catch (const Error&) {
      return std::nullopt;
    }
    if (!detail::kkt_consistent(cd, limits, label, kkt, tol::kExplicitDual,
                                tol::kExplicitPrimal)) {
      return std::nullopt;
    }
    return from_kkt(kkt, label);
  };

  if (!row_degenerate(cd)) {
    if (auto sol = try_label({true, {}})) return finish(*sol);
    for (const auto& set : candidates_) {
      if (auto sol = try_label({true, set})) return finish(*sol);
    }
  }
  if (!nominal_admissible) {
    for (const auto& set : candidates_) {
      if (auto sol = try_label({false, set})) return finish(*sol);
    }
  }

  AdaptiveSolution sol;
  sol.case_tag = cd.alpha_b == 0.0 ? CaseTag::kDegenerateInfeasible : CaseTag::kInfeasible;
  sol.u_star = Vec::Constant(u_des.size(), std::numeric_limits<double>::quiet_NaN());
  sol.s_star = std::numeric_limits<double>::infinity();
  sol.lambda = std::numeric_limits<double>::quiet_NaN();
  sol.mu = Vec::Zero(p);
  detail::attach_certificate(sol, cd, limits, 0.0);
  sol.reason = cd.alpha_b == 0.0
                   ? "alpha(B) = 0 and L_fB + L_gB u < 0 on U; s* is unbounded"
                   : "no critical region admits a KKT point";
  return finish(sol);
}

AdaptiveSolution ad_classify_and_solve(const ProblemSpec& spec, const Vec& x) {
  return AdaptiveController(spec).solve(x);
}

double ad_kkt_residual(const ProblemSpec& spec, const Vec& x, const PointSolution& sol) {
  return ad_kkt_residual(spec, x, sol, spec.p_s);
}

double ad_kkt_residual(const ProblemSpec& spec, const Vec& x, const PointSolution& sol,
                       double p_s) {
  return detail::kkt_residual(lie_derivatives(spec, x), spec.u_des(x), spec.limits, sol, p_s);
}

}  // namespace ecbf
