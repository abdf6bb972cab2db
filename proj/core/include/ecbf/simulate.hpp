#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "ecbf/controller.hpp"

namespace ecbf {

struct TrajectoryPoint {
  double t = 0.0;
  Vec x;
  Vec u;
  double s = 1.0;
  CaseTag case_tag = CaseTag::kCase1;
  double b_val = 0.0;
};

enum class SimStatus {
  kCompleted,
  kControllerFailure,  // controller infeasible (or threw) at a stage point
  kLeftDomain,         // state left the exploration box
};

std::string_view to_string(SimStatus status);

struct Trajectory {
  double h = 0.0;
  Mode mode = Mode::kStandard;
  std::vector<TrajectoryPoint> points;
  SimStatus status = SimStatus::kCompleted;
  std::string message;
  std::optional<Vec> failure_state;
  std::optional<double> barrier_crossing_time;  // first t with B(x(t)) < 0
};

/// Fixed-step classical Runge-Kutta on xdot = f(x) + g(x) u(x), with the
/// controller re-evaluated at every stage point. Stops early when the
/// controller fails or the state leaves spec.domain.
Trajectory simulate(const SafeController& controller, const Vec& x0, double t_final, double h);
Trajectory simulate(const ProblemSpec& spec, const Vec& x0, double t_final, double h, Mode mode);

/// Minimum recorded B(x(t)). Requires a nonempty trajectory.
double min_barrier(const Trajectory& traj);

/// CSV: t,x1..xn,u1..um,s,case,B.
void write_trajectory_csv(std::ostream& os, const Trajectory& traj);

}  // namespace ecbf
