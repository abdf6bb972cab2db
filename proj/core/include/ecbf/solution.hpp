#pragma once

#include <string>
#include <string_view>

#include "ecbf/linalg.hpp"
#include "ecbf/model.hpp"

namespace ecbf {

enum class CaseTag {
  kCase1,                 // CBF row inactive, u* = u_des
  kCase2,                 // CBF row active, no limits active
  kCase3,                 // CBF row and a set of limit rows active
  kInfeasible,            // no KKT point exists
  kDegenerateInfeasible,  // adaptive QP with alpha(B) = 0 and no admissible u
};

std::string_view to_string(CaseTag tag);

/// Identity of a critical region: which rows of the QP hold with equality.
struct ActiveSetLabel {
  bool cbf_active = false;
  IndexSet limit_indices;  // zero-based, strictly increasing

  /// Serialized as "b+1.3": CBF flag, then one-based limit indices.
  /// The empty set is "0".
  std::string str() const;

  bool operator==(const ActiveSetLabel&) const = default;
};

/// Precedence order: fewer active rows first, CBF row before limit-only sets,
/// then lexicographic on the limit indices.
bool operator<(const ActiveSetLabel& a, const ActiveSetLabel& b);

struct PointSolution {
  Vec u_star;
  double lambda = 0.0;  // CBF multiplier
  Vec mu;               // input-limit multipliers, zero on inactive rows
  double s_star = 1.0;  // relaxation coefficient; 1 for the standard QP
  CaseTag case_tag = CaseTag::kInfeasible;
  ActiveSetLabel active_set;
  std::string reason;  // populated for infeasible results
  // Max over the input set of L_fB + L_gB u + alpha(B); set when the result is
  // infeasible and the input set has vertices.
  double certificate = 0.0;
  bool has_certificate = false;

  bool feasible() const {
    return case_tag != CaseTag::kInfeasible && case_tag != CaseTag::kDegenerateInfeasible;
  }
};

struct AdaptiveSolution : PointSolution {
  bool near_degenerate = false;   // |s*| above tol::kAdaptiveCap
  bool outside_safe_set = false;  // B(x) < 0 at the evaluated state
};

/// Label used in census and CSV output; "nan" for infeasible results.
std::string label_string(const PointSolution& sol);

}  // namespace ecbf
