#include "ecbf/controller.hpp"

#include "kkt_system.hpp"

namespace ecbf {

std::string_view to_string(Mode mode) {
  switch (mode) {
    case Mode::kStandard: return "standard";
    case Mode::kAdaptive: return "adaptive";
    case Mode::kNominal: return "nominal";
  }
  return "unknown";
}

SafeController::SafeController(const ProblemSpec& spec, Mode mode)
    : SafeController(spec, mode, spec.p_s) {}

SafeController::SafeController(const ProblemSpec& spec, Mode mode, double p_s)
    : spec_(&spec), mode_(mode), p_s_(p_s) {
  switch (mode) {
    case Mode::kStandard: impl_.emplace<ExplicitController>(spec); break;
    case Mode::kAdaptive: impl_.emplace<AdaptiveController>(spec, p_s); break;
    case Mode::kNominal: break;
  }
}

AdaptiveSolution SafeController::solve(const Vec& x) const {
  if (const auto* ad = std::get_if<AdaptiveController>(&impl_)) return ad->solve(x);

  AdaptiveSolution out;
  if (const auto* ex = std::get_if<ExplicitController>(&impl_)) {
    static_cast<PointSolution&>(out) = ex->solve(x);
  } else {
    out.u_star = spec_->u_des(x);
    out.mu = Vec::Zero(spec_->limits.rows());
    out.case_tag = CaseTag::kCase1;
  }
  out.outside_safe_set = spec_->barrier.value(x) < 0.0;
  return out;
}

double SafeController::kkt_residual(const Vec& x, const PointSolution& sol) const {
  const auto cd = lie_derivatives(*spec_, x);
  const auto ud = spec_->u_des(x);
  if (mode_ == Mode::kAdaptive) return detail::kkt_residual(cd, ud, spec_->limits, sol, p_s_);
  return detail::kkt_residual(cd, ud, spec_->limits, sol, std::nullopt);
}

}  // namespace ecbf
