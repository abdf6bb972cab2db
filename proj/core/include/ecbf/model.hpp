#pragma once

#include <Eigen/Dense>

#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace ecbf {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

/// Control-affine dynamics xdot = f(x) + g(x) u.
struct DynamicsModel {
  std::string name;
  int state_dim = 0;
  int input_dim = 0;
  std::function<Vec(const Vec&)> drift;         // f: R^n -> R^n
  std::function<Mat(const Vec&)> input_matrix;  // g: R^n -> R^{n x m}
};

/// Extended class-K function used as the barrier relaxation term.
struct ClassK {
  std::string name;
  std::function<double(double)> eval;

  double operator()(double b) const { return eval(b); }
};

struct BarrierSpec {
  std::string name;
  std::function<double(const Vec&)> value;
  std::function<Vec(const Vec&)> gradient;
  ClassK alpha;
};

/// Input set U = { u : A u + b <= 0 }.
struct ControlPolytope {
  Mat A;
  Vec b;

  int rows() const { return static_cast<int>(A.rows()); }
  int dim() const { return static_cast<int>(A.cols()); }

  Vec evaluate(const Vec& u) const { return A * u + b; }
  bool contains(const Vec& u, double tol = 0.0) const;

  /// Vertices by enumerating every m-subset of rows. Exponential in p but
  /// the input sets this library targets have a handful of rows.
  std::vector<Vec> vertices(double tol = 1e-10) const;

  /// max over U of c.u + d, or nullopt when U has no vertices (empty or
  /// unbounded).
  std::optional<double> max_linear(const Vec& c, double d) const;

  static ControlPolytope box(const Vec& lo, const Vec& hi);
};

/// Nominal controller: a constant vector or a state feedback law.
class NominalControl {
 public:
  NominalControl() = default;
  explicit NominalControl(Vec constant) : constant_(std::move(constant)) {}
  NominalControl(std::string name, std::function<Vec(const Vec&)> law)
      : name_(std::move(name)), law_(std::move(law)) {}

  bool is_constant() const { return !law_; }
  const Vec& constant() const { return constant_; }
  const std::string& name() const { return name_; }

  Vec operator()(const Vec& x) const { return law_ ? law_(x) : constant_; }

 private:
  Vec constant_;
  std::string name_ = "constant";
  std::function<Vec(const Vec&)> law_;
};

/// Axis-aligned exploration window standing in for the set C.
struct Box {
  Vec lo;
  Vec hi;

  int dim() const { return static_cast<int>(lo.size()); }
  bool contains(const Vec& x) const;
};

struct ProblemSpec {
  DynamicsModel dynamics;
  BarrierSpec barrier;
  ControlPolytope limits;
  NominalControl u_des;
  Box domain;
  double p_s = 100.0;

  int state_dim() const { return dynamics.state_dim; }
  int input_dim() const { return dynamics.input_dim; }
};

/// Per-state CBF constraint row  L_fB + L_gB u + alpha(B) >= 0.
///
/// The accessors F, G and Lambda expose the negated quantities used when the
/// constraint is written in "<= 0" form: F + G u + Lambda <= 0.
struct ConstraintData {
  double lfb = 0.0;
  Vec lgb;
  double alpha_b = 0.0;
  double b_val = 0.0;

  double F() const { return -lfb; }
  Vec G() const { return -lgb; }
  double Lambda() const { return -alpha_b; }

  /// L_fB + L_gB u + s alpha(B); nonnegative when the (relaxed) row holds.
  double slack(const Vec& u, double s = 1.0) const { return lfb + lgb.dot(u) + s * alpha_b; }
};

ConstraintData lie_derivatives(const ProblemSpec& spec, const Vec& x);

/// Returns one human-readable message per violated invariant; empty when valid.
std::vector<std::string> validate_spec(const ProblemSpec& spec);

// Built-in model registry.
DynamicsModel linear_dynamics(const Mat& a_sys, const Mat& b_sys);
ClassK linear_class_k(double k);
ClassK cubic_class_k(double k);
/// B(x) = r - (x - c)^T P (x - c) with P symmetric positive definite.
BarrierSpec quadratic_barrier(double r, const Vec& center, const Mat& p, ClassK alpha);
NominalControl linear_feedback(const Mat& gain, const Vec& offset);

/// The two-state example: xdot = [[1,2],[1,1]] x + u, |u_i| <= 1,
/// B = 9 - |x|^2, alpha(b) = 0.5 b, u_des = (0.5, 0.5), box [-3.5, 3.5]^2.
ProblemSpec linear2d_example(double p_s = 100.0);

}  // namespace ecbf
