#pragma once

#include <vector>

#include "ecbf/model.hpp"
#include "ecbf/solution.hpp"

namespace ecbf {

// Closed-form solutions of the adaptive CBF-QP over (s, u):
//
//   min_{s,u}  p_s/2 (s - 1)^2 + 1/2 |u - u_des|^2
//   s.t.       L_fB + L_gB u + s alpha(B) >= 0,   A u + b <= 0.
//
// s is unconstrained in sign.

/// CBF row inactive at (u_des, s = 1): s* = 1, u* = u_des.
AdaptiveSolution ad_solve_case1(const ConstraintData& cd, const Vec& u_des, int num_limits = 0);

/// CBF row active, limits inactive. Throws kDegenerateRow when both L_gB and
/// alpha(B) vanish, because then neither s nor u can move the row.
AdaptiveSolution ad_solve_case2(const ConstraintData& cd, const Vec& u_des, double p_s,
                                int num_limits = 0);

/// CBF row and the limit rows in `active` hold with equality (|I| <= m).
AdaptiveSolution ad_solve_case3(const ConstraintData& cd, const Vec& u_des,
                                const ControlPolytope& limits, const IndexSet& active,
                                double p_s);

class AdaptiveController {
 public:
  explicit AdaptiveController(const ProblemSpec& spec);
  AdaptiveController(const ProblemSpec& spec, double p_s);

  /// Never infeasible when alpha(B(x)) != 0. With alpha(B(x)) = 0 and no
  /// admissible input the result is tagged kDegenerateInfeasible.
  AdaptiveSolution solve(const Vec& x) const;
  AdaptiveSolution solve(const ConstraintData& cd, const Vec& u_des) const;

  double p_s() const { return p_s_; }
  const std::vector<IndexSet>& candidate_sets() const { return candidates_; }

 private:
  const ProblemSpec* spec_;
  double p_s_;
  std::vector<IndexSet> candidates_;  // CBF row + I, |I| <= m
};

AdaptiveSolution ad_classify_and_solve(const ProblemSpec& spec, const Vec& x);

/// KKT violation including the s-stationarity row, divided by
/// max(1, largest multiplier). Uses spec.p_s.
double ad_kkt_residual(const ProblemSpec& spec, const Vec& x, const PointSolution& sol);
double ad_kkt_residual(const ProblemSpec& spec, const Vec& x, const PointSolution& sol,
                       double p_s);

}  // namespace ecbf
