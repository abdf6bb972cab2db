#include "ecbf/model.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "ecbf/errors.hpp"
#include "ecbf/linalg.hpp"

namespace ecbf {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kNonFiniteEvaluation: return "NonFiniteEvaluation";
    case ErrorCode::kPreconditionViolated: return "PreconditionViolated";
    case ErrorCode::kDegenerateGradient: return "DegenerateGradient";
    case ErrorCode::kDegenerateRow: return "DegenerateRow";
    case ErrorCode::kRankDeficient: return "RankDeficient";
    case ErrorCode::kTooManyRows: return "TooManyRows";
    case ErrorCode::kTooManyLimits: return "TooManyLimits";
    case ErrorCode::kSingularSubsystem: return "SingularSubsystem";
    case ErrorCode::kSegmentCrossesInfeasible: return "SegmentCrossesInfeasible";
    case ErrorCode::kControllerFailure: return "ControllerFailure";
    case ErrorCode::kConfigError: return "ConfigError";
  }
  return "Unknown";
}

bool ControlPolytope::contains(const Vec& u, double tol) const {
  return rows() == 0 || evaluate(u).maxCoeff() <= tol;
}

std::vector<Vec> ControlPolytope::vertices(double tol) const {
  std::vector<Vec> out;
  const int m = dim();
  const int p = rows();
  if (m == 0 || p < m) return out;
  for (const auto& subset : combinations(p, m)) {
    Mat a_sub(m, m);
    Vec b_sub(m);
    for (int k = 0; k < m; ++k) {
      a_sub.row(k) = A.row(subset[k]);
      b_sub(k) = b(subset[k]);
    }
    if (!full_row_rank(a_sub)) continue;
    Vec v = a_sub.fullPivLu().solve(-b_sub);
    if (!contains(v, tol)) continue;
    bool duplicate = std::any_of(out.begin(), out.end(), [&](const Vec& w) {
      return (w - v).lpNorm<Eigen::Infinity>() <= tol;
    });
    if (!duplicate) out.push_back(std::move(v));
  }
  return out;
}

std::optional<double> ControlPolytope::max_linear(const Vec& c, double d) const {
  const auto verts = vertices();
  if (verts.empty()) return std::nullopt;
  double best = -std::numeric_limits<double>::infinity();
  for (const auto& v : verts) best = std::max(best, c.dot(v) + d);
  return best;
}

ControlPolytope ControlPolytope::box(const Vec& lo, const Vec& hi) {
  const auto m = lo.size();
  ControlPolytope poly;
  poly.A = Mat::Zero(2 * m, m);
  poly.b = Vec::Zero(2 * m);
  // Row order per coordinate: upper bound, then lower bound.
  for (Eigen::Index i = 0; i < m; ++i) {
    poly.A(2 * i, i) = 1.0;
    poly.b(2 * i) = -hi(i);
    poly.A(2 * i + 1, i) = -1.0;
    poly.b(2 * i + 1) = lo(i);
  }
  return poly;
}

bool Box::contains(const Vec& x) const {
  return ((x.array() >= lo.array()) && (x.array() <= hi.array())).all();
}

ConstraintData lie_derivatives(const ProblemSpec& spec, const Vec& x) {
  if (!x.allFinite()) throw Error(ErrorCode::kNonFiniteEvaluation, "state is not finite");
  const Vec grad = spec.barrier.gradient(x);
  const Vec f = spec.dynamics.drift(x);
  const Mat g = spec.dynamics.input_matrix(x);

  ConstraintData cd;
  cd.lfb = grad.dot(f);
  cd.lgb = g.transpose() * grad;
  cd.b_val = spec.barrier.value(x);
  cd.alpha_b = spec.barrier.alpha(cd.b_val);
  if (!std::isfinite(cd.lfb) || !cd.lgb.allFinite() || !std::isfinite(cd.b_val) ||
      !std::isfinite(cd.alpha_b)) {
    throw Error(ErrorCode::kNonFiniteEvaluation, "constraint data is not finite");
  }
  return cd;
}

std::vector<std::string> validate_spec(const ProblemSpec& spec) {
  std::vector<std::string> issues;
  const int n = spec.state_dim();
  const int m = spec.input_dim();
  auto fail = [&](std::string msg) { issues.push_back(std::move(msg)); };

  if (n < 1) fail("state dimension must be positive");
  if (m < 1) fail("input dimension must be positive");
  if (!spec.dynamics.drift || !spec.dynamics.input_matrix) fail("dynamics evaluators are missing");
  if (!spec.barrier.value || !spec.barrier.gradient) fail("barrier evaluators are missing");
  if (!spec.barrier.alpha.eval) fail("class-K function is missing");

  const auto& lim = spec.limits;
  if (lim.rows() < 1) fail("input polytope must have at least one row");
  if (lim.dim() != m) {
    fail("input polytope has " + std::to_string(lim.dim()) + " columns, expected " +
         std::to_string(m));
  }
  if (lim.b.size() != lim.rows()) fail("input polytope b has wrong length");
  for (int i = 0; i < lim.rows(); ++i) {
    if (!lim.A.row(i).allFinite() || lim.A.row(i).norm() == 0.0) {
      fail("input polytope row " + std::to_string(i + 1) + " is zero or not finite");
    }
  }
  if (!(spec.p_s > 0.0) || !std::isfinite(spec.p_s)) fail("p_s must be positive");

  if (spec.domain.lo.size() != n || spec.domain.hi.size() != n) {
    fail("domain box dimension does not match the state dimension");
  } else if (!(spec.domain.lo.array() < spec.domain.hi.array()).all()) {
    fail("domain box must satisfy min < max on every axis");
  }

  if (spec.u_des.is_constant()) {
    const Vec& ud = spec.u_des.constant();
    if (ud.size() != m) {
      fail("u_des has wrong dimension");
    } else if (lim.dim() == m && lim.b.size() == lim.rows() && !lim.contains(ud, 1e-12)) {
      fail("constant u_des violates the input limits");
    }
  }
  if (!issues.empty()) return issues;

  // Sample B over the domain on a deterministic quasi-random sequence and check
  // that alpha is strictly increasing over the sampled values with alpha(0)=0.
  const auto& alpha = spec.barrier.alpha;
  if (alpha(0.0) != 0.0) fail("alpha(0) must be 0");
  constexpr int kSamples = 1000;
  std::vector<double> bs;
  bs.reserve(kSamples + 1);
  for (int k = 0; k < kSamples; ++k) {
    Vec x(n);
    for (int d = 0; d < n; ++d) {
      // Additive recurrence with irrational increments per axis.
      const double step = std::sqrt(static_cast<double>(2 + 3 * d)) - 1.0;
      double frac = std::fmod(0.5 + (k + 1) * step, 1.0);
      x(d) = spec.domain.lo(d) + frac * (spec.domain.hi(d) - spec.domain.lo(d));
    }
    bs.push_back(spec.barrier.value(x));
  }
  bs.push_back(0.0);
  std::sort(bs.begin(), bs.end());
  bs.erase(std::unique(bs.begin(), bs.end()), bs.end());
  for (std::size_t k = 1; k < bs.size(); ++k) {
    if (!(alpha(bs[k]) > alpha(bs[k - 1]))) {
      std::ostringstream os;
      os << "alpha is not strictly increasing between B=" << bs[k - 1] << " and B=" << bs[k];
      fail(os.str());
      break;
    }
  }
  return issues;
}

DynamicsModel linear_dynamics(const Mat& a_sys, const Mat& b_sys) {
  DynamicsModel dyn;
  dyn.name = "linear";
  dyn.state_dim = static_cast<int>(a_sys.rows());
  dyn.input_dim = static_cast<int>(b_sys.cols());
  dyn.drift = [a_sys](const Vec& x) -> Vec { return a_sys * x; };
  dyn.input_matrix = [b_sys](const Vec&) -> Mat { return b_sys; };
  return dyn;
}

ClassK linear_class_k(double k) {
  return ClassK{"linear", [k](double b) { return k * b; }};
}

ClassK cubic_class_k(double k) {
  return ClassK{"cubic", [k](double b) { return k * b * b * b; }};
}

BarrierSpec quadratic_barrier(double r, const Vec& center, const Mat& p, ClassK alpha) {
  BarrierSpec bs;
  bs.name = "quadratic";
  bs.value = [r, center, p](const Vec& x) {
    const Vec d = x - center;
    return r - d.dot(p * d);
  };
  // P symmetric: grad = -2 P (x - c).
  bs.gradient = [center, p](const Vec& x) -> Vec { return -2.0 * (p * (x - center)); };
  bs.alpha = std::move(alpha);
  return bs;
}

NominalControl linear_feedback(const Mat& gain, const Vec& offset) {
  return NominalControl("linear", [gain, offset](const Vec& x) -> Vec { return gain * x + offset; });
}

ProblemSpec linear2d_example(double p_s) {
  ProblemSpec spec;
  Mat a_sys(2, 2);
  a_sys << 1.0, 2.0, 1.0, 1.0;
  spec.dynamics = linear_dynamics(a_sys, Mat::Identity(2, 2));
  spec.barrier = quadratic_barrier(9.0, Vec::Zero(2), Mat::Identity(2, 2), linear_class_k(0.5));
  spec.limits = ControlPolytope::box(Vec::Constant(2, -1.0), Vec::Constant(2, 1.0));
  spec.u_des = NominalControl(Vec::Constant(2, 0.5));
  spec.domain = Box{Vec::Constant(2, -3.5), Vec::Constant(2, 3.5)};
  spec.p_s = p_s;
  return spec;
}

}  // namespace ecbf
