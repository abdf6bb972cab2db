#include "ecbf/solution.hpp"

#include <sstream>

namespace ecbf {

std::string_view to_string(CaseTag tag) {
  switch (tag) {
    case CaseTag::kCase1: return "Case1";
    case CaseTag::kCase2: return "Case2";
    case CaseTag::kCase3: return "Case3";
    case CaseTag::kInfeasible: return "Infeasible";
    case CaseTag::kDegenerateInfeasible: return "DegenerateInfeasible";
  }
  return "Unknown";
}

std::string ActiveSetLabel::str() const {
  std::ostringstream os;
  if (cbf_active) os << 'b';
  if (!limit_indices.empty()) {
    os << '+';
    for (std::size_t k = 0; k < limit_indices.size(); ++k) {
      if (k) os << '.';
      os << limit_indices[k] + 1;
    }
  }
  const auto s = os.str();
  return s.empty() ? "0" : s;
}

std::string label_string(const PointSolution& sol) {
  return sol.feasible() ? sol.active_set.str() : "nan";
}

bool operator<(const ActiveSetLabel& a, const ActiveSetLabel& b) {
  const auto size_a = a.limit_indices.size() + (a.cbf_active ? 1 : 0);
  const auto size_b = b.limit_indices.size() + (b.cbf_active ? 1 : 0);
  if (size_a != size_b) return size_a < size_b;
  if (a.cbf_active != b.cbf_active) return a.cbf_active;
  return a.limit_indices < b.limit_indices;
}

}  // namespace ecbf
