#pragma once

#include <vector>

#include "ecbf/model.hpp"
#include "ecbf/solution.hpp"

namespace ecbf {

// Closed-form solutions of the standard CBF-QP
//
//   min_u  1/2 |u - u_des|^2
//   s.t.   L_fB + L_gB u + alpha(B) >= 0,   A u + b <= 0,
//
// one function per active-set case. `num_limits` sizes the zero multiplier
// vector for the cases that do not touch the input polytope.

/// CBF row inactive: u* = u_des. Throws kPreconditionViolated when the CBF row
/// is violated at u_des.
PointSolution solve_case1(const ConstraintData& cd, const Vec& u_des, int num_limits = 0);

/// CBF row active, limits inactive: orthogonal projection of u_des onto the
/// constraint hyperplane. Throws kDegenerateGradient when L_gB vanishes.
PointSolution solve_case2(const ConstraintData& cd, const Vec& u_des, int num_limits = 0);

/// CBF row plus the limit rows in `active` hold with equality. Solved as one
/// stacked KKT system. Throws kDegenerateGradient or kRankDeficient.
PointSolution solve_case3(const ConstraintData& cd, const Vec& u_des,
                          const ControlPolytope& limits, const IndexSet& active);

/// Evaluates the explicit control law by testing each critical region in
/// precedence order (Case 1, Case 2, Case 3 by ascending |I| then
/// lexicographic). The rank-pruned candidate list is computed once.
class ExplicitController {
 public:
  explicit ExplicitController(const ProblemSpec& spec);

  PointSolution solve(const Vec& x) const;
  PointSolution solve(const ConstraintData& cd, const Vec& u_des) const;

  const std::vector<IndexSet>& candidate_sets() const { return candidates_; }

 private:
  const ProblemSpec* spec_;
  std::vector<IndexSet> candidates_;     // CBF row + I, |I| <= m - 1
  std::vector<IndexSet> limit_only_;     // used only when u_des lies outside U
};

PointSolution classify_and_solve(const ProblemSpec& spec, const Vec& x);

/// KKT violation of `sol` at state x, divided by max(1, largest multiplier).
double kkt_residual(const ProblemSpec& spec, const Vec& x, const PointSolution& sol);

/// Same conditions without the multiplier scaling.
double kkt_residual_absolute(const ProblemSpec& spec, const Vec& x, const PointSolution& sol);

/// True when |L_gB| is negligible relative to the other row coefficients.
bool gradient_degenerate(const ConstraintData& cd);

}  // namespace ecbf
