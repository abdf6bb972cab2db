#include "ecbf/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include "ecbf/errors.hpp"
#include "ecbf/partition.hpp"

namespace ecbf {

std::string_view to_string(SimStatus status) {
  switch (status) {
    case SimStatus::kCompleted: return "completed";
    case SimStatus::kControllerFailure: return "controller_failure";
    case SimStatus::kLeftDomain: return "left_domain";
  }
  return "unknown";
}

namespace {

struct ControlSample {
  bool ok = false;
  AdaptiveSolution sol;
  std::string message;
};

ControlSample control_at(const SafeController& controller, const Vec& x) {
  ControlSample out;
  try {
    out.sol = controller.solve(x);
    out.ok = out.sol.feasible();
    if (!out.ok) out.message = std::string(to_string(out.sol.case_tag)) + ": " + out.sol.reason;
  } catch (const Error& e) {
    out.message = e.what();
  }
  return out;
}

Vec closed_loop_rate(const ProblemSpec& spec, const Vec& x, const Vec& u) {
  return spec.dynamics.drift(x) + spec.dynamics.input_matrix(x) * u;
}

}  // namespace

Trajectory simulate(const SafeController& controller, const Vec& x0, double t_final, double h) {
  const ProblemSpec& spec = controller.spec();
  if (!(h > 0.0)) throw Error(ErrorCode::kPreconditionViolated, "step must be positive");
  if (!(t_final >= h)) throw Error(ErrorCode::kPreconditionViolated, "t_final must be >= step");
  if (!spec.domain.contains(x0)) {
    throw Error(ErrorCode::kPreconditionViolated, "initial state lies outside the domain");
  }

  Trajectory traj;
  traj.h = h;
  traj.mode = controller.mode();
  const auto steps = static_cast<long>(std::llround(t_final / h));

  auto fail = [&](const Vec& x, std::string msg) {
    traj.status = SimStatus::kControllerFailure;
    traj.failure_state = x;
    traj.message = std::move(msg);
  };

  Vec x = x0;
  for (long k = 0; k <= steps; ++k) {
    const double t = static_cast<double>(k) * h;
    const ControlSample c1 = control_at(controller, x);
    if (!c1.ok) {
      fail(x, c1.message);
      break;
    }
    TrajectoryPoint pt;
    pt.t = t;
    pt.x = x;
    pt.u = c1.sol.u_star;
    pt.s = c1.sol.s_star;
    pt.case_tag = c1.sol.case_tag;
    pt.b_val = spec.barrier.value(x);
    if (pt.b_val < 0.0 && !traj.barrier_crossing_time) traj.barrier_crossing_time = t;
    traj.points.push_back(pt);
    if (k == steps) break;

    const Vec k1 = closed_loop_rate(spec, x, c1.sol.u_star);
    Vec stage = x + 0.5 * h * k1;
    const ControlSample c2 = control_at(controller, stage);
    if (!c2.ok) {
      fail(stage, c2.message);
      break;
    }
    const Vec k2 = closed_loop_rate(spec, stage, c2.sol.u_star);
    stage = x + 0.5 * h * k2;
    const ControlSample c3 = control_at(controller, stage);
    if (!c3.ok) {
      fail(stage, c3.message);
      break;
    }
    const Vec k3 = closed_loop_rate(spec, stage, c3.sol.u_star);
    stage = x + h * k3;
    const ControlSample c4 = control_at(controller, stage);
    if (!c4.ok) {
      fail(stage, c4.message);
      break;
    }
    const Vec k4 = closed_loop_rate(spec, stage, c4.sol.u_star);
    x += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);

    if (!spec.domain.contains(x)) {
      traj.status = SimStatus::kLeftDomain;
      traj.failure_state = x;
      traj.message = "state left the domain at t=" + format_double(t + h);
      break;
    }
  }
  return traj;
}

Trajectory simulate(const ProblemSpec& spec, const Vec& x0, double t_final, double h, Mode mode) {
  return simulate(SafeController(spec, mode), x0, t_final, h);
}

double min_barrier(const Trajectory& traj) {
  if (traj.points.empty()) {
    throw Error(ErrorCode::kPreconditionViolated, "trajectory is empty");
  }
  double lo = traj.points.front().b_val;
  for (const auto& p : traj.points) lo = std::min(lo, p.b_val);
  return lo;
}

void write_trajectory_csv(std::ostream& os, const Trajectory& traj) {
  const Eigen::Index n = traj.points.empty() ? 0 : traj.points.front().x.size();
  const Eigen::Index m = traj.points.empty() ? 0 : traj.points.front().u.size();
  os << 't';
  for (Eigen::Index i = 0; i < n; ++i) os << ",x" << i + 1;
  for (Eigen::Index j = 0; j < m; ++j) os << ",u" << j + 1;
  os << ",s,case,B\n";
  for (const auto& p : traj.points) {
    os << format_double(p.t);
    for (Eigen::Index i = 0; i < n; ++i) os << ',' << format_double(p.x(i));
    for (Eigen::Index j = 0; j < m; ++j) os << ',' << format_double(p.u(j));
    os << ',' << format_double(p.s) << ',' << to_string(p.case_tag) << ','
       << format_double(p.b_val) << '\n';
  }
}

}  // namespace ecbf
