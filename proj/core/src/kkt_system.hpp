#pragma once

#include <optional>

#include "ecbf/model.hpp"
#include "ecbf/solution.hpp"

namespace ecbf::detail {

/// Solution of the equality-constrained KKT system for one active set.
struct KktSolve {
  Vec u;
  double s = 1.0;
  double lambda = 0.0;
  Vec mu;  // length p, zero outside the active limit rows
};

/// Solves the stacked linear system
///   H z + J^T nu = -c,  J z = r
/// where z = u (standard, p_s empty) or z = (s, u) (adaptive) and J stacks the
/// CBF row (when active) over the active limit rows.
/// Throws Error(kRankDeficient) when J is not of full row rank.
KktSolve solve_active_set(const ConstraintData& cd, const Vec& u_des,
                          const ControlPolytope& limits, const ActiveSetLabel& label,
                          std::optional<double> p_s);

/// Whether a candidate satisfies the sign and inactive-row conditions.
bool kkt_consistent(const ConstraintData& cd, const ControlPolytope& limits,
                    const ActiveSetLabel& label, const KktSolve& sol, double dual_tol,
                    double primal_tol);

/// Max-norm KKT violation, divided by max(1, largest multiplier magnitude).
double kkt_residual(const ConstraintData& cd, const Vec& u_des, const ControlPolytope& limits,
                    const PointSolution& sol, std::optional<double> p_s);

/// Unscaled variant of kkt_residual.
double kkt_residual_absolute(const ConstraintData& cd, const Vec& u_des,
                             const ControlPolytope& limits, const PointSolution& sol,
                             std::optional<double> p_s);

/// Fills a PointSolution from a KKT solve and its label.
void assign(PointSolution& out, const KktSolve& sol, const ActiveSetLabel& label);

/// Active-set candidates with the CBF row active, rank-pruned and capped at
/// max_limits rows, in precedence order.
std::vector<IndexSet> cbf_candidate_sets(const ControlPolytope& limits, int max_limits);

/// Populates the infeasibility certificate (vertex maximum of the CBF row).
void attach_certificate(PointSolution& out, const ConstraintData& cd,
                        const ControlPolytope& limits, double s = 1.0);

}  // namespace ecbf::detail
