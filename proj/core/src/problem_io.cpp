#include "ecbf/problem_io.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "ecbf/errors.hpp"
#include "json.hpp"

namespace ecbf {
namespace {

using nlohmann::json;

[[noreturn]] void config_error(const std::string& msg) { throw Error(ErrorCode::kConfigError, msg); }

const json& require(const json& obj, const char* key, const std::string& where) {
  if (!obj.is_object() || !obj.contains(key)) config_error(where + ": missing key '" + key + "'");
  return obj.at(key);
}

double to_number(const json& j, const std::string& where) {
  if (!j.is_number()) config_error(where + ": expected a number");
  return j.get<double>();
}

Vec to_vector(const json& j, const std::string& where) {
  if (!j.is_array()) config_error(where + ": expected an array of numbers");
  Vec v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) v(i) = to_number(j[i], where);
  return v;
}

Mat to_matrix(const json& j, const std::string& where) {
  if (!j.is_array() || j.empty()) config_error(where + ": expected a nonempty array of rows");
  const std::size_t cols = j[0].is_array() ? j[0].size() : 0;
  Mat m(static_cast<Eigen::Index>(j.size()), static_cast<Eigen::Index>(cols));
  for (std::size_t r = 0; r < j.size(); ++r) {
    if (!j[r].is_array() || j[r].size() != cols) {
      config_error(where + ": row " + std::to_string(r + 1) + " has the wrong length");
    }
    for (std::size_t c = 0; c < cols; ++c) m(r, c) = to_number(j[r][c], where);
  }
  return m;
}

DynamicsModel parse_dynamics(const json& j) {
  const std::string type = require(j, "type", "dynamics").get<std::string>();
  const json& params = require(j, "params", "dynamics");
  if (type == "linear") {
    const Mat a = to_matrix(require(params, "A", "dynamics.params"), "dynamics.params.A");
    const Mat b = to_matrix(require(params, "B", "dynamics.params"), "dynamics.params.B");
    if (a.rows() != a.cols()) config_error("dynamics.params.A must be square");
    if (b.rows() != a.rows()) config_error("dynamics.params.B must have as many rows as A");
    return linear_dynamics(a, b);
  }
  if (type == "pendulum") {
    // x = (angle, rate); torque input.
    const double grav = params.value("gravity", 9.81);
    const double len = params.value("length", 1.0);
    const double mass = params.value("mass", 1.0);
    const double damping = params.value("damping", 0.0);
    DynamicsModel dyn;
    dyn.name = "pendulum";
    dyn.state_dim = 2;
    dyn.input_dim = 1;
    dyn.drift = [=](const Vec& x) -> Vec {
      Vec f(2);
      f << x(1), grav / len * std::sin(x(0)) - damping / (mass * len * len) * x(1);
      return f;
    };
    dyn.input_matrix = [=](const Vec&) -> Mat {
      Mat g(2, 1);
      g << 0.0, 1.0 / (mass * len * len);
      return g;
    };
    return dyn;
  }
  config_error("unknown dynamics type '" + type + "'");
}

ClassK parse_alpha(const json& j) {
  const std::string type = require(j, "type", "alpha").get<std::string>();
  const double k = to_number(require(j, "k", "alpha"), "alpha.k");
  if (type == "linear") return linear_class_k(k);
  if (type == "cubic") return cubic_class_k(k);
  config_error("unknown alpha type '" + type + "'");
}

BarrierSpec parse_barrier(const json& j, ClassK alpha, int n) {
  const std::string type = require(j, "type", "barrier").get<std::string>();
  const json& params = require(j, "params", "barrier");
  if (type == "quadratic") {
    const double r = to_number(require(params, "r", "barrier.params"), "barrier.params.r");
    const Vec c = params.contains("center") ? to_vector(params["center"], "barrier.params.center")
                                            : Vec::Zero(n);
    const Mat p = params.contains("P") ? to_matrix(params["P"], "barrier.params.P")
                                       : Mat::Identity(n, n);
    if (c.size() != n || p.rows() != n || p.cols() != n) {
      config_error("barrier.params dimensions do not match the state dimension");
    }
    if ((p - p.transpose()).lpNorm<Eigen::Infinity>() > 1e-12 || p.llt().info() != Eigen::Success) {
      config_error("barrier.params.P must be symmetric positive definite");
    }
    return quadratic_barrier(r, c, p, std::move(alpha));
  }
  config_error("unknown barrier type '" + type + "'");
}

ControlPolytope parse_limits(const json& j, int m) {
  if (j.contains("lower") || j.contains("upper")) {
    const Vec lo = to_vector(require(j, "lower", "limits"), "limits.lower");
    const Vec hi = to_vector(require(j, "upper", "limits"), "limits.upper");
    if (lo.size() != m || hi.size() != m) config_error("limits bounds must have one entry per input");
    return ControlPolytope::box(lo, hi);
  }
  ControlPolytope poly;
  poly.A = to_matrix(require(j, "A", "limits"), "limits.A");
  poly.b = to_vector(require(j, "b", "limits"), "limits.b");
  if (poly.A.cols() != m) config_error("limits.A must have one column per input");
  if (poly.b.size() != poly.A.rows()) config_error("limits.b must have one entry per row of A");
  return poly;
}

NominalControl parse_nominal(const json& j, int n, int m) {
  if (j.is_array()) {
    Vec u = to_vector(j, "u_des");
    if (u.size() != m) config_error("u_des must have one entry per input");
    return NominalControl(std::move(u));
  }
  const std::string type = require(j, "type", "u_des").get<std::string>();
  if (type == "constant") return parse_nominal(require(j, "value", "u_des"), n, m);
  if (type == "linear") {
    const Mat k = to_matrix(require(j, "K", "u_des"), "u_des.K");
    const Vec off = j.contains("offset") ? to_vector(j["offset"], "u_des.offset") : Vec::Zero(m);
    if (k.rows() != m || k.cols() != n || off.size() != m) {
      config_error("u_des.K must be m x n and offset length m");
    }
    return linear_feedback(k, off);
  }
  config_error("unknown u_des type '" + type + "'");
}

}  // namespace

ProblemSpec parse_problem(const std::string& json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::exception& e) {
    config_error(std::string("malformed JSON: ") + e.what());
  }
  try {
    ProblemSpec spec;
    spec.dynamics = parse_dynamics(require(doc, "dynamics", "problem"));
    const int n = spec.dynamics.state_dim;
    const int m = spec.dynamics.input_dim;
    spec.barrier = parse_barrier(require(doc, "barrier", "problem"),
                                 parse_alpha(require(doc, "alpha", "problem")), n);
    spec.limits = parse_limits(require(doc, "limits", "problem"), m);
    spec.u_des = parse_nominal(require(doc, "u_des", "problem"), n, m);
    const json& dom = require(doc, "domain", "problem");
    spec.domain.lo = to_vector(require(dom, "min", "domain"), "domain.min");
    spec.domain.hi = to_vector(require(dom, "max", "domain"), "domain.max");
    if (spec.domain.lo.size() != n || spec.domain.hi.size() != n) {
      config_error("domain bounds must have one entry per state");
    }
    if (doc.contains("p_s")) spec.p_s = to_number(doc["p_s"], "p_s");
    return spec;
  } catch (const json::exception& e) {
    config_error(std::string("invalid problem: ") + e.what());
  }
}

ProblemSpec load_problem(const std::string& path) {
  std::ifstream in(path);
  if (!in) config_error("cannot open problem file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_problem(ss.str());
}

}  // namespace ecbf
