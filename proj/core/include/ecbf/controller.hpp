#pragma once

#include <string_view>
#include <variant>

#include "ecbf/adaptive_qp.hpp"
#include "ecbf/explicit_qp.hpp"

namespace ecbf {

enum class Mode { kStandard, kAdaptive, kNominal };

std::string_view to_string(Mode mode);

/// Mode-dispatching wrapper over the explicit controllers. Nominal mode
/// returns u_des unfiltered and is only meaningful for simulation.
/// Holds a reference to `spec`; the spec must outlive the controller.
class SafeController {
 public:
  SafeController(const ProblemSpec& spec, Mode mode);
  SafeController(const ProblemSpec& spec, Mode mode, double p_s);

  /// Standard results are widened to AdaptiveSolution with s* = 1. Errors
  /// from the underlying controller propagate.
  AdaptiveSolution solve(const Vec& x) const;

  Mode mode() const { return mode_; }
  const ProblemSpec& spec() const { return *spec_; }

  /// Residual of `sol` against the KKT system of this controller's program.
  double kkt_residual(const Vec& x, const PointSolution& sol) const;

 private:
  const ProblemSpec* spec_;
  Mode mode_;
  double p_s_;
  std::variant<std::monostate, ExplicitController, AdaptiveController> impl_;
};

}  // namespace ecbf
