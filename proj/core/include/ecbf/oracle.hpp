#pragma once

#include <string>

#include "ecbf/model.hpp"
#include "ecbf/solution.hpp"

namespace ecbf {

/// min 1/2 z^T H z + c^T z  subject to  M z + v <= 0.
struct DenseQP {
  Mat H;
  Vec c;
  Mat M;
  Vec v;
};

enum class OracleStatus { kOptimal, kInfeasible, kNumericalFailure };

struct OracleResult {
  OracleStatus status = OracleStatus::kInfeasible;
  Vec z;
  Vec multipliers;  // one per inequality row, zero off the active set
  IndexSet active;  // accepted subset of rows
  double objective = 0.0;
  int skipped_singular = 0;  // subsets whose equality system was singular
  std::string certificate;   // how infeasibility was established
};

/// Ground-truth solver for small strictly convex QPs: solves the equality KKT
/// system of every subset of rows and keeps the admissible candidate with the
/// lowest objective (ties: fewer rows, then lexicographic). Not for
/// production use; q <= 20 rows.
/// Throws kTooManyRows, or kPreconditionViolated when H is not symmetric
/// positive definite.
OracleResult solve_bruteforce(const DenseQP& qp);

/// The standard CBF-QP at state x assembled as a DenseQP over z = u.
DenseQP standard_qp(const ProblemSpec& spec, const Vec& x);
/// The adaptive CBF-QP at state x assembled over z = (s, u).
DenseQP adaptive_qp(const ProblemSpec& spec, const Vec& x, double p_s);

PointSolution oracle_standard(const ProblemSpec& spec, const Vec& x);
AdaptiveSolution oracle_adaptive(const ProblemSpec& spec, const Vec& x);
AdaptiveSolution oracle_adaptive(const ProblemSpec& spec, const Vec& x, double p_s);

}  // namespace ecbf
