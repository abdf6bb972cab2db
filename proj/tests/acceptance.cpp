// Acceptance suite for the reference two-state problem. Prints one PASS/FAIL
// line per criterion; exit status is nonzero when any selected criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "ecbf/errors.hpp"
#include "ecbf/oracle.hpp"
#include "ecbf/partition.hpp"
#include "ecbf/simulate.hpp"

using namespace ecbf;

namespace {

constexpr int kGrid = 301;
constexpr double kEquivTol = 1e-6;
constexpr double kResidualTol = 1e-8;
constexpr std::uint64_t kSeed = 42;

struct Outcome {
  bool pass = false;
  std::string detail;
};

Vec v2(double a, double b) {
  Vec v(2);
  v << a, b;
  return v;
}

std::string fmt(double v) { return format_double(v); }

double elapsed_s(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

Outcome equivalence(Mode mode) {
  const ProblemSpec spec = linear2d_example(100.0);
  const auto t0 = std::chrono::steady_clock::now();
  const GridClassification gc = classify_grid(spec, mode, kGrid, 1);
  const double explicit_s = elapsed_s(t0);

  double max_du = 0.0;
  double max_res = 0.0;
  std::size_t compared = 0;
  std::size_t status_mismatch = 0;
  std::size_t unsolved_inside = 0;
  for (const auto& c : gc.cells) {
    const AdaptiveSolution o =
        mode == Mode::kStandard ? AdaptiveSolution{oracle_standard(spec, c.x)} : oracle_adaptive(spec, c.x);
    if (mode == Mode::kAdaptive && c.b_val > 0.0 && !c.feasible()) ++unsolved_inside;
    if (!o.feasible()) continue;
    if (!c.feasible()) {
      ++status_mismatch;
      continue;
    }
    ++compared;
    max_du = std::max(max_du, (c.sol.u_star - o.u_star).lpNorm<Eigen::Infinity>());
    max_res = std::max(max_res, c.kkt_residual);
  }
  Outcome out;
  out.pass = status_mismatch == 0 && unsolved_inside == 0 && max_du <= kEquivTol &&
             max_res <= kResidualTol && explicit_s < 60.0;
  out.detail = "compared " + std::to_string(compared) + ", status mismatches " +
               std::to_string(status_mismatch) +
               (mode == Mode::kAdaptive ? ", unsolved with B>0 " + std::to_string(unsolved_inside) : "") +
               ", max |du| " + fmt(max_du) + ", max KKT residual " + fmt(max_res) +
               ", explicit grid " + fmt(std::round(explicit_s * 1000) / 1000) + " s";
  return out;
}

std::string join(const std::vector<std::string>& xs) {
  std::string s;
  for (const auto& x : xs) s += (s.empty() ? "" : " ") + x;
  return s;
}

Outcome census_standard() {
  const ProblemSpec spec = linear2d_example();
  const SafeController ctl(spec, Mode::kStandard);
  const GridClassification gc = classify_grid(ctl, spec.domain, {kGrid, kGrid});
  const auto census = region_census(gc);
  const std::set<std::string> allowed{"0", "b", "b+1", "b+2", "b+3", "b+4", "nan"};

  std::vector<std::string> extra;
  for (const auto& [label, n] : census) {
    if (!allowed.count(label)) extra.push_back(label);
  }
  bool ok = extra.empty();
  for (const char* label : {"0", "b", "nan"}) ok = ok && census.count(label) && census.at(label) > 0;

  std::vector<std::string> notes;
  std::optional<RefinementReport> refined;
  for (const char* label : {"b+1", "b+2", "b+3", "b+4"}) {
    if (census.count(label)) {
      notes.push_back(std::string(label) + "=" + std::to_string(census.at(label)));
      continue;
    }
    if (!refined) refined = refine_boundaries(ctl, gc, 4, 0.1);
    if (refined->census.count(label)) {
      notes.push_back(std::string(label) + " refined=" + std::to_string(refined->census.at(label)));
      continue;
    }
    // Empty under refinement: no grid point may have this oracle active set.
    std::size_t hits = 0;
    for (const auto& c : gc.cells) {
      const PointSolution o = oracle_standard(spec, c.x);
      if (o.feasible() && o.active_set.str() == label) ++hits;
    }
    notes.push_back(std::string(label) + " empty, oracle hits " + std::to_string(hits));
    ok = ok && hits == 0;
  }
  Outcome out;
  out.pass = ok;
  out.detail = "0=" + std::to_string(census.count("0") ? census.at("0") : 0) +
               " b=" + std::to_string(census.count("b") ? census.at("b") : 0) +
               " nan=" + std::to_string(census.count("nan") ? census.at("nan") : 0) + " " +
               join(notes) + (extra.empty() ? "" : ", unexpected labels: " + join(extra));
  return out;
}

Outcome census_adaptive() {
  const ProblemSpec spec = linear2d_example(100.0);
  const GridClassification gc = classify_grid(spec, Mode::kAdaptive, kGrid, 1);
  const std::set<std::string> allowed{"0",   "b",     "b+1",   "b+2",   "b+3",
                                      "b+4", "b+1.3", "b+1.4", "b+2.3", "b+2.4"};
  std::vector<std::string> extra;
  std::size_t infeasible_inside = 0;
  std::set<std::string> seen;
  for (const auto& c : gc.cells) {
    if (c.b_val > 0.0 && !c.feasible()) ++infeasible_inside;
    if (c.b_val > 0.0 || c.feasible()) seen.insert(c.label());
  }
  for (const auto& l : seen) {
    if (!allowed.count(l)) extra.push_back(l);
  }
  Outcome out;
  out.pass = extra.empty() && infeasible_inside == 0;
  out.detail = std::to_string(seen.size()) + " labels observed, infeasible with B>0: " +
               std::to_string(infeasible_inside) +
               (extra.empty() ? "" : ", unexpected labels: " + join(extra));
  return out;
}

Outcome spot_values() {
  const ProblemSpec spec = linear2d_example(100.0);
  const SafeController st(spec, Mode::kStandard);
  const SafeController ad(spec, Mode::kAdaptive);
  std::vector<std::string> failed;
  auto check = [&failed](bool cond, const std::string& what) {
    if (!cond) failed.push_back(what);
  };
  auto near = [](const Vec& a, const Vec& b) { return (a - b).lpNorm<Eigen::Infinity>() <= kEquivTol; };

  const Vec x0 = v2(0, 0);
  check(near(st.solve(x0).u_star, v2(0.5, 0.5)), "standard (0,0)");
  check(near(ad.solve(x0).u_star, v2(0.5, 0.5)), "adaptive (0,0)");

  const Vec x1 = v2(0, 1.5);
  const AdaptiveSolution s1 = st.solve(x1);
  const PointSolution o1 = oracle_standard(spec, x1);
  check(near(s1.u_star, v2(0.5, -0.375)) && near(s1.u_star, o1.u_star), "standard (0,1.5) u");
  check(std::abs(s1.lambda - 7.0 / 24.0) <= kEquivTol && std::abs(s1.lambda - o1.lambda) <= kEquivTol,
        "standard (0,1.5) lambda");

  const Vec x2 = v2(2.8, 0);
  check(st.solve(x2).case_tag == CaseTag::kInfeasible &&
            oracle_standard(spec, x2).case_tag == CaseTag::kInfeasible,
        "standard (2.8,0) infeasible");
  const AdaptiveSolution a2 = ad.solve(x2);
  const AdaptiveSolution o2 = oracle_adaptive(spec, x2);
  check(std::abs(a2.s_star - 17.3793) <= 1e-4 && std::abs(a2.s_star - o2.s_star) <= kEquivTol,
        "adaptive (2.8,0) s");
  check(near(a2.u_star, v2(-1, 0.5)) && near(a2.u_star, o2.u_star), "adaptive (2.8,0) u");

  Outcome out;
  out.pass = failed.empty();
  out.detail = "lambda(0,1.5)=" + fmt(s1.lambda) + ", s*(2.8,0)=" + fmt(a2.s_star) +
               (failed.empty() ? "" : ", failed: " + join(failed));
  return out;
}

// Segments between jittered centres of adjacent coarse cells with different
// labels, sampled at a step of at most 1e-4.
Outcome continuity() {
  const ProblemSpec spec = linear2d_example();
  const SafeController ctl(spec, Mode::kStandard);
  constexpr int kCoarse = 61;
  const GridClassification gc = classify_grid(ctl, spec.domain, {kCoarse, kCoarse});
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  for (int i = 0; i < kCoarse; ++i) {
    for (int j = 0; j < kCoarse; ++j) {
      const std::size_t a = static_cast<std::size_t>(i) * kCoarse + j;
      const std::size_t right = a + 1;
      const std::size_t down = a + kCoarse;
      for (std::size_t b : {right, down}) {
        if ((b == right && j + 1 >= kCoarse) || (b == down && i + 1 >= kCoarse)) continue;
        if (gc.cells[a].feasible() && gc.cells[b].feasible() &&
            gc.cells[a].label() != gc.cells[b].label()) {
          pairs.emplace_back(a, b);
        }
      }
    }
  }

  std::mt19937_64 rng(kSeed);
  std::uniform_int_distribution<std::size_t> pick(0, pairs.size() - 1);
  std::uniform_real_distribution<double> jitter(-0.02, 0.02);
  int accepted = 0;
  int attempts = 0;
  double worst = 0.0;
  while (accepted < 50 && attempts < 5000) {
    ++attempts;
    const auto [ia, ib] = pairs[pick(rng)];
    const Vec a = gc.cells[ia].x + v2(jitter(rng), jitter(rng));
    const Vec b = gc.cells[ib].x + v2(jitter(rng), jitter(rng));
    const auto samples = static_cast<std::size_t>(std::ceil((b - a).norm() / 1e-4)) + 1;
    ProbeReport rep;
    try {
      rep = continuity_probe(ctl, a, b, samples);
    } catch (const Error&) {
      continue;  // jitter pushed the segment through the infeasible region
    }
    if (rep.crossings.empty()) continue;
    ++accepted;
    worst = std::max(worst, rep.ratio);
  }
  Outcome out;
  out.pass = accepted == 50 && worst <= 10.0;
  out.detail = std::to_string(accepted) + " segments (" + std::to_string(attempts) +
               " drawn), worst boundary/interior ratio " + fmt(worst);
  return out;
}

Outcome penalty_limit() {
  const ProblemSpec spec = linear2d_example();
  const SafeController st(spec, Mode::kStandard);
  const SafeController ad(spec, Mode::kAdaptive, 1e6);
  std::mt19937_64 rng(kSeed);
  std::uniform_real_distribution<double> d(-3.5, 3.5);
  int n = 0;
  double worst = 0.0;
  while (n < 500) {
    const Vec x = v2(d(rng), d(rng));
    const AdaptiveSolution s = st.solve(x);
    if (!s.feasible()) continue;
    ++n;
    worst = std::max(worst, (ad.solve(x).u_star - s.u_star).lpNorm<Eigen::Infinity>());
  }
  Outcome out;
  out.pass = worst <= 1e-3;
  out.detail = "500 points, max |u_adaptive - u_standard| " + fmt(worst);
  return out;
}

Outcome blow_up() {
  const ProblemSpec spec = linear2d_example(100.0);
  const SafeController ad(spec, Mode::kAdaptive);
  std::vector<double> s;
  for (int k = 0; k <= 499; ++k) {
    const double r = 2.5 + 0.001 * k;
    const AdaptiveSolution sol = ad.solve(v2(r, 0));
    s.push_back(sol.feasible() ? sol.s_star : std::nan(""));
  }
  bool increasing = true;
  for (std::size_t k = s.size() - 10; k < s.size(); ++k) increasing = increasing && s[k] > s[k - 1];
  const double first = s.front();
  const double last = s.back();
  Outcome out;
  out.pass = increasing && last > 10.0 * first;
  out.detail = "s*(2.5)=" + fmt(first) + ", s*(2.999)=" + fmt(last) +
               (increasing ? ", increasing on the last 10 samples" : ", NOT increasing");
  return out;
}

Outcome invariance() {
  const ProblemSpec spec = linear2d_example(100.0);
  const SafeController st(spec, Mode::kStandard);
  const SafeController ad(spec, Mode::kAdaptive);
  auto feasible_near = [&](const Vec& x) {
    for (int k = 0; k < 8; ++k) {
      const double th = k * std::numbers::pi / 4.0;
      if (!st.solve(x + 0.05 * v2(std::cos(th), std::sin(th))).feasible()) return false;
    }
    return st.solve(x).feasible();
  };

  std::mt19937_64 rng(kSeed);
  std::uniform_real_distribution<double> d(-3.0, 3.0);
  int runs = 0;
  int unsafe = 0;
  double worst = std::numeric_limits<double>::infinity();
  std::string first_bad;
  while (runs < 20) {
    const Vec x0 = v2(d(rng), d(rng));
    if (spec.barrier.value(x0) < 0.5 || !feasible_near(x0)) continue;
    ++runs;
    const Trajectory traj = simulate(ad, x0, 10.0, 0.01);
    const double lo = min_barrier(traj);
    worst = std::min(worst, lo);
    if (lo < -1e-3 || traj.status == SimStatus::kControllerFailure) {
      ++unsafe;
      if (first_bad.empty()) {
        first_bad = "(" + fmt(x0(0)) + "," + fmt(x0(1)) + ")";
        if (traj.barrier_crossing_time) first_bad += " crosses at t=" + fmt(*traj.barrier_crossing_time);
      }
    }
  }
  const Trajectory nominal = simulate(spec, v2(0, 1.5), 10.0, 0.01, Mode::kNominal);
  const bool nominal_exits = nominal.barrier_crossing_time.has_value();

  Outcome out;
  out.pass = unsafe == 0 && nominal_exits;
  out.detail = std::to_string(runs - unsafe) + "/" + std::to_string(runs) +
               " adaptive runs safe, worst min B " + fmt(worst) +
               (first_bad.empty() ? "" : ", first unsafe start " + first_bad) +
               "; nominal from (0,1.5) " +
               (nominal_exits ? "exits at t=" + fmt(*nominal.barrier_crossing_time) : "stays inside");
  return out;
}

struct Criterion {
  int id;
  const char* name;
  std::function<Outcome()> run;
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Acceptance criteria for the reference problem"};
  std::vector<int> selected;
  app.add_option("-c,--criterion", selected, "Run only these criteria (1-9)")->check(CLI::Range(1, 9));
  CLI11_PARSE(app, argc, argv);

  const std::vector<Criterion> all{
      {1, "oracle equivalence (standard)", [] { return equivalence(Mode::kStandard); }},
      {2, "oracle equivalence (adaptive)", [] { return equivalence(Mode::kAdaptive); }},
      {3, "standard region census", census_standard},
      {4, "adaptive region census", census_adaptive},
      {5, "spot values", spot_values},
      {6, "lipschitz continuity across boundaries", continuity},
      {7, "large-penalty consistency", penalty_limit},
      {8, "blow-up along the ray theta=0", blow_up},
      {9, "invariance simulation", invariance},
  };

  int failures = 0;
  for (const auto& c : all) {
    if (!selected.empty() && std::find(selected.begin(), selected.end(), c.id) == selected.end()) {
      continue;
    }
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o.detail = std::string("exception: ") + e.what();
    }
    std::printf("%s %d %s: %s\n", o.pass ? "PASS" : "FAIL", c.id, c.name, o.detail.c_str());
    std::fflush(stdout);
    if (!o.pass) ++failures;
  }
  return failures == 0 ? 0 : 1;
}
