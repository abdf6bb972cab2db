#pragma once

#include <cmath>
#include <functional>
#include <limits>
#include <random>

#include "ecbf/model.hpp"

namespace ecbf::testing {

inline Vec v2(double a, double b) {
  Vec v(2);
  v << a, b;
  return v;
}

inline double inf() { return std::numeric_limits<double>::infinity(); }

// Coarse-to-fine grid search of a convex function over a 2-D box; +inf marks
// points outside the feasible set. Each level re-centres a 41x41 lattice on
// the incumbent and shrinks the window by 4.
inline Vec grid_minimize(const std::function<double(const Vec&)>& f, const Vec& lo, const Vec& hi,
                         int levels = 24) {
  constexpr int kN = 41;
  Vec best = 0.5 * (lo + hi);
  double best_val = inf();
  Vec half = 0.5 * (hi - lo);
  Vec centre = best;
  for (int level = 0; level < levels; ++level) {
    for (int i = 0; i < kN; ++i) {
      for (int j = 0; j < kN; ++j) {
        Vec u = centre + v2(half(0) * (2.0 * i / (kN - 1) - 1.0), half(1) * (2.0 * j / (kN - 1) - 1.0));
        u = u.cwiseMax(lo).cwiseMin(hi);
        const double val = f(u);
        if (val < best_val) {
          best_val = val;
          best = u;
        }
      }
    }
    centre = best;
    half /= 4.0;
  }
  return best;
}

// Euclidean projection of y onto {u : c.u + d >= 0} intersected with the box
// [lo, hi] by Dykstra's alternating projections. This is the standard QP
// solution when y = u_des and the halfspace is the CBF row.
inline Vec dykstra_projection(const Vec& y, const Vec& c, double d, const Vec& lo, const Vec& hi,
                              int iterations = 200000) {
  Vec x = y;
  Vec p = Vec::Zero(y.size());
  Vec q = Vec::Zero(y.size());
  for (int k = 0; k < iterations; ++k) {
    const Vec a = x + p;
    Vec z = a;
    const double viol = c.dot(a) + d;
    if (viol < 0.0) z = a - viol / c.squaredNorm() * c;
    p = a - z;
    const Vec b = z + q;
    const Vec next = b.cwiseMax(lo).cwiseMin(hi);
    q = b - next;
    const double change = (next - x).lpNorm<Eigen::Infinity>();
    x = next;
    if (change < 1e-15 && k > 10) break;
  }
  return x;
}

// Adaptive objective with s eliminated: for alpha(B) > 0 the best s at fixed
// u is max(1, -(L_fB + L_gB u) / alpha(B)).
inline double adaptive_reduced(const ConstraintData& cd, const Vec& ud, double p_s, const Vec& u,
                               double* s_out = nullptr) {
  const double s = std::max(1.0, -(cd.lfb + cd.lgb.dot(u)) / cd.alpha_b);
  if (s_out) *s_out = s;
  return 0.5 * p_s * (s - 1.0) * (s - 1.0) + 0.5 * (u - ud).squaredNorm();
}

}  // namespace ecbf::testing
