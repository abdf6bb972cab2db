#include "doctest.h"
#include "ecbf/adaptive_qp.hpp"
#include "ecbf/errors.hpp"
#include "ecbf/explicit_qp.hpp"
#include "ecbf/oracle.hpp"
#include "ecbf/partition.hpp"
#include "support.hpp"

using namespace ecbf;
using ecbf::testing::v2;

namespace {

// Independent minimiser of the adaptive QP with s eliminated.
Vec search_adaptive(const ProblemSpec& spec, const Vec& x, double p_s, double* s = nullptr) {
  const ConstraintData cd = lie_derivatives(spec, x);
  const Vec ud = spec.u_des(x);
  const Vec u = ecbf::testing::grid_minimize(
      [&](const Vec& v) { return ecbf::testing::adaptive_reduced(cd, ud, p_s, v); }, v2(-1, -1),
      v2(1, 1));
  ecbf::testing::adaptive_reduced(cd, ud, p_s, u, s);
  return u;
}

}  // namespace

TEST_CASE("adaptive case 1") {
  const ProblemSpec spec = linear2d_example();
  for (const Vec& x : {v2(0, 0), v2(-2.2, 1.3)}) {
    const AdaptiveSolution sol = ad_solve_case1(lie_derivatives(spec, x), v2(0.5, 0.5), 4);
    CHECK(sol.s_star == 1.0);
    CHECK(sol.u_star.isApprox(v2(0.5, 0.5)));
    CHECK(sol.lambda == 0.0);
    CHECK(oracle_adaptive(spec, x).s_star == doctest::Approx(1.0).epsilon(1e-12));
  }
  ConstraintData cd;
  cd.lfb = 0.5;
  cd.lgb = v2(1, 1);
  cd.alpha_b = 0.1;
  CHECK(ad_solve_case1(cd, v2(0, 0)).s_star == 1.0);
}

TEST_CASE("adaptive case 2") {
  const ProblemSpec spec = linear2d_example();
  const ConstraintData cd = lie_derivatives(spec, v2(0, 1.5));
  const AdaptiveSolution sol = ad_solve_case2(cd, v2(0.5, 0.5), 100.0, 4);

  SUBCASE("spot value by one-dimensional elimination") {
    // Row active: -4.5 - 3 u2 + 3.375 s = 0, so u2 = 1.125 s - 1.5. Minimising
    // 50 (s - 1)^2 + 1/2 (u2 - 0.5)^2 gives s = (100 + 2.25) / (100 + 1.125^2).
    const double s = (100.0 + 2.25) / (100.0 + 1.125 * 1.125);
    CHECK(sol.s_star == doctest::Approx(s).epsilon(1e-14));
    CHECK(sol.u_star(0) == doctest::Approx(0.5));
    CHECK(sol.u_star(1) == doctest::Approx(1.125 * s - 1.5).epsilon(1e-14));
    CHECK(sol.s_star == doctest::Approx(1.0097207221107853).epsilon(1e-12));
    CHECK(sol.u_star(1) == doctest::Approx(-0.36406418762536646).epsilon(1e-12));
    double s_ref = 0.0;
    const Vec u_ref = search_adaptive(spec, v2(0, 1.5), 100.0, &s_ref);
    CHECK((sol.u_star - u_ref).lpNorm<Eigen::Infinity>() <= 1e-7);
    CHECK(std::abs(sol.s_star - s_ref) <= 1e-7);
  }

  SUBCASE("printed closed form") {
    const double p_s = 100.0;
    const Vec g = cd.G();
    const double lam = p_s * (cd.Lambda() + g.dot(v2(0.5, 0.5)) + cd.F()) /
                       (p_s * g.squaredNorm() + cd.Lambda() * cd.Lambda());
    CHECK(std::abs(sol.lambda - lam) <= 1e-10);
    CHECK(std::abs(sol.s_star - (1.0 - cd.Lambda() / p_s * lam)) <= 1e-10);
    CHECK((sol.u_star - (v2(0.5, 0.5) - g * lam)).lpNorm<Eigen::Infinity>() <= 1e-10);
    CHECK(std::abs(cd.F() + g.dot(sol.u_star) + sol.s_star * cd.Lambda()) <= 1e-10);
  }

  SUBCASE("zero violation") {
    ConstraintData z;
    z.lgb = v2(1, -1);
    z.alpha_b = 0.4;
    z.lfb = -0.4 - z.lgb.dot(v2(0.3, 0.1));
    const AdaptiveSolution s = ad_solve_case2(z, v2(0.3, 0.1), 100.0);
    CHECK(std::abs(s.lambda) <= 1e-15);
    CHECK(s.s_star == doctest::Approx(1.0));
    CHECK(s.u_star.isApprox(v2(0.3, 0.1)));
  }

  SUBCASE("large penalty recovers the standard projection") {
    const AdaptiveSolution big = ad_solve_case2(cd, v2(0.5, 0.5), 1e8);
    const PointSolution std2 = solve_case2(cd, v2(0.5, 0.5));
    CHECK((big.u_star - std2.u_star).lpNorm<Eigen::Infinity>() <= 1e-4);
    CHECK(std::abs(big.s_star - 1.0) <= 1e-4);
  }

  SUBCASE("degenerate row") {
    ConstraintData d;
    d.lfb = -1.0;
    d.lgb = v2(0, 0);
    d.alpha_b = 0.0;
    bool thrown = false;
    try {
      ad_solve_case2(d, v2(0, 0), 100.0);
    } catch (const Error& e) {
      thrown = e.code() == ErrorCode::kDegenerateRow;
    }
    CHECK(thrown);
  }
}

TEST_CASE("adaptive case 3") {
  const ProblemSpec spec = linear2d_example();
  const double p_s = 100.0;

  SUBCASE("single limit at (2.8, 0)") {
    const ConstraintData cd = lie_derivatives(spec, v2(2.8, 0));
    const AdaptiveSolution sol = ad_solve_case3(cd, v2(0.5, 0.5), spec.limits, {1}, p_s);
    CHECK(sol.s_star == doctest::Approx(10.08 / 0.58).epsilon(1e-12));
    CHECK(sol.u_star.isApprox(v2(-1, 0.5)));
    const AdaptiveSolution ref = oracle_adaptive(spec, v2(2.8, 0), p_s);
    CHECK(std::abs(sol.s_star - ref.s_star) <= 1e-8);
    CHECK((sol.u_star - ref.u_star).lpNorm<Eigen::Infinity>() <= 1e-8);
    double s_ref = 0.0;
    const Vec u_ref = search_adaptive(spec, v2(2.8, 0), p_s, &s_ref);
    CHECK((sol.u_star - u_ref).lpNorm<Eigen::Infinity>() <= 1e-7);
    CHECK(std::abs(sol.s_star - s_ref) / sol.s_star <= 1e-7);
  }

  SUBCASE("two limits at oracle-located states") {
    for (const IndexSet& rows : std::vector<IndexSet>{{0, 2}, {0, 3}, {1, 2}, {1, 3}}) {
      bool found = false;
      for (int i = 0; i < 601 && !found; ++i) {
        for (int j = 0; j < 601 && !found; ++j) {
          const Vec x = v2(grid_coordinate(-3.5, 3.5, 601, i), grid_coordinate(-3.5, 3.5, 601, j));
          const AdaptiveSolution o = oracle_adaptive(spec, x, p_s);
          if (!o.feasible() || !(o.active_set == ActiveSetLabel{true, rows}) ||
              o.lambda < 1e-3 || o.mu(rows[0]) < 1e-3 || o.mu(rows[1]) < 1e-3) {
            continue;
          }
          found = true;
          const AdaptiveSolution sol =
              ad_solve_case3(lie_derivatives(spec, x), v2(0.5, 0.5), spec.limits, rows, p_s);
          CHECK(std::abs(sol.s_star - o.s_star) <= 1e-8 * std::max(1.0, std::abs(o.s_star)));
          CHECK((sol.u_star - o.u_star).lpNorm<Eigen::Infinity>() <= 1e-8);
        }
      }
      CHECK(found);
    }
  }

  SUBCASE("printed closed form") {
    const Vec x = v2(0.046666666666666856, 2.7300000000000004);
    const IndexSet rows{1};
    const ConstraintData cd = lie_derivatives(spec, x);
    const Vec ud = v2(0.5, 0.5);
    const AdaptiveSolution sol = ad_solve_case3(cd, ud, spec.limits, rows, p_s);
    const Mat a = select_rows(spec.limits.A, rows);
    const Vec b = select_rows(spec.limits.b, rows);
    const Vec g = cd.G();
    const Mat aat_inv = (a * a.transpose()).inverse();
    const Mat a_minus = Mat::Identity(2, 2) - a.transpose() * aat_inv * a;
    const double lam = p_s *
                       (cd.F() + g.dot(a_minus * ud) + cd.Lambda() -
                        g.dot(a.transpose() * aat_inv * b)) /
                       (p_s * g.dot(a_minus * g) + cd.Lambda() * cd.Lambda());
    const Vec mu = aat_inv * (a * ud - a * g * lam + b);
    const Vec u = ud - a.transpose() * mu - g * lam;
    const double s = 1.0 - cd.Lambda() / p_s * lam;
    CHECK(std::abs(sol.lambda - lam) <= 1e-10 * std::max(1.0, lam));
    CHECK(std::abs(sol.mu(1) - mu(0)) <= 1e-10 * std::max(1.0, mu(0)));
    CHECK((sol.u_star - u).lpNorm<Eigen::Infinity>() <= 1e-10);
    CHECK(std::abs(sol.s_star - s) <= 1e-10 * std::max(1.0, s));
  }

  SUBCASE("duplicated limit") {
    ControlPolytope dup = spec.limits;
    dup.A.conservativeResize(5, 2);
    dup.b.conservativeResize(5);
    dup.A.row(4) = dup.A.row(0);
    dup.b(4) = dup.b(0);
    bool thrown = false;
    try {
      ad_solve_case3(lie_derivatives(spec, v2(2.8, 0)), v2(0.5, 0.5), dup, {0, 4}, p_s);
    } catch (const Error& e) {
      thrown = e.code() == ErrorCode::kRankDeficient;
    }
    CHECK(thrown);
  }
}

TEST_CASE("adaptive classification") {
  const ProblemSpec spec = linear2d_example();
  const AdaptiveController ctl(spec);
  CHECK(ctl.candidate_sets().size() == 8);

  CHECK(ctl.solve(v2(0, 0)).case_tag == CaseTag::kCase1);

  const AdaptiveSolution s = ctl.solve(v2(2.8, 0));
  CHECK(s.feasible());
  CHECK(s.active_set.str() == "b+2");
  CHECK(s.s_star == doctest::Approx(17.37931034482757));

  const AdaptiveSolution edge = ctl.solve(v2(3, 0));
  CHECK((edge.case_tag == CaseTag::kDegenerateInfeasible || edge.near_degenerate));

  const AdaptiveSolution outside = ctl.solve(v2(3.2, 0));
  CHECK(outside.outside_safe_set);
}

TEST_CASE("adaptive invariants on a grid") {
  const ProblemSpec spec = linear2d_example();
  const AdaptiveController ctl(spec);
  double worst = 0.0;
  int solved = 0;
  for (int i = 0; i < 61; ++i) {
    for (int j = 0; j < 61; ++j) {
      const Vec x = v2(grid_coordinate(-3.5, 3.5, 61, i), grid_coordinate(-3.5, 3.5, 61, j));
      const AdaptiveSolution sol = ctl.solve(x);
      if (spec.barrier.value(x) > 0.0) CHECK(sol.feasible());
      if (!sol.feasible()) continue;
      ++solved;
      worst = std::max(worst, ad_kkt_residual(spec, x, sol));
      // s* = 1 exactly when the CBF multiplier vanishes.
      CHECK((sol.s_star == 1.0) == (sol.lambda == 0.0));
      const double lambda_map = -lie_derivatives(spec, x).alpha_b;
      CHECK(std::abs(sol.s_star - (1.0 - lambda_map / spec.p_s * sol.lambda)) <=
            1e-9 * std::max(1.0, std::abs(sol.s_star)));
    }
  }
  CHECK(solved > 0);
  CHECK(worst <= 1e-8);
}

TEST_CASE("adaptive kkt residual") {
  const ProblemSpec spec = linear2d_example();
  const Vec x = v2(0, 1.5);
  AdaptiveSolution sol = ad_classify_and_solve(spec, x);
  REQUIRE(sol.case_tag == CaseTag::kCase2);
  CHECK(ad_kkt_residual(spec, x, sol) <= 1e-12);
  sol.s_star += 0.1;
  CHECK(ad_kkt_residual(spec, x, sol) >= 0.1 * spec.p_s - 1e-9);
  CHECK(ad_kkt_residual(spec, v2(2.8, 0), oracle_adaptive(spec, v2(2.8, 0))) <= 1e-8);
}
