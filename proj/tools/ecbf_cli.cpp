// ecbf: explicit CBF-QP safety filter toolkit.
//
//   ecbf partition <problem.json> [--standard|--adaptive] [-r N] [--out-dir D]
//   ecbf eval      <problem.json> -x x1,x2,... [--standard|--adaptive]
//   ecbf verify    <problem.json> [-n N] [--seed S] [--tol T] [--out-dir D]
//   ecbf simulate  <problem.json> -x x1,x2,... [--t-final T] [--step h]
//                  [--standard|--adaptive|--nominal] [--out-dir D]
//
// Exit codes: 0 success, 1 safety violated in simulation, 2 configuration
// error, 3 numerical failure on > 0.1% of cells, 4 infeasible evaluation,
// 5 verification failure, 6 controller failure during simulation.

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "ecbf/adaptive_qp.hpp"
#include "ecbf/controller.hpp"
#include "ecbf/errors.hpp"
#include "ecbf/explicit_qp.hpp"
#include "ecbf/oracle.hpp"
#include "ecbf/partition.hpp"
#include "ecbf/problem_io.hpp"
#include "ecbf/simulate.hpp"
#include "json.hpp"

namespace fs = std::filesystem;
using ecbf::Mode;
using ecbf::Vec;

namespace {

enum ExitCode : int {
  kOk = 0,
  kUnsafe = 1,
  kConfig = 2,
  kNumerical = 3,
  kInfeasible = 4,
  kVerifyFailed = 5,
  kControllerFailure = 6,
};

struct RunConfig {
  std::string problem;
  bool standard = false;
  bool adaptive = false;
  bool nominal = false;
  int resolution = 301;
  std::optional<double> p_s;
  std::string state;
  double t_final = 10.0;
  double step = 0.01;
  std::uint64_t seed = 42;
  std::string out_dir = ".";
  double tol = 1e-6;
  int samples = 5000;
  unsigned threads = 1;
  bool refine = false;
};

class ConfigFailure : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

Mode mode_of(const RunConfig& cfg, Mode fallback) {
  if (cfg.nominal) return Mode::kNominal;
  if (cfg.adaptive) return Mode::kAdaptive;
  if (cfg.standard) return Mode::kStandard;
  return fallback;
}

ecbf::ProblemSpec load(const RunConfig& cfg) {
  ecbf::ProblemSpec spec = ecbf::load_problem(cfg.problem);
  if (cfg.p_s) spec.p_s = *cfg.p_s;
  const auto issues = ecbf::validate_spec(spec);
  if (!issues.empty()) {
    std::ostringstream os;
    for (const auto& s : issues) os << "\n  " << s;
    throw ConfigFailure("invalid problem '" + cfg.problem + "':" + os.str());
  }
  return spec;
}

Vec parse_state(const std::string& text, int n) {
  std::vector<double> vals;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      vals.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw ConfigFailure("cannot parse state component '" + item + "'");
    }
  }
  if (static_cast<int>(vals.size()) != n) {
    throw ConfigFailure("state must have " + std::to_string(n) + " components");
  }
  return Eigen::Map<Vec>(vals.data(), n);
}

fs::path prepare_out_dir(const RunConfig& cfg) {
  fs::path dir(cfg.out_dir);
  fs::create_directories(dir);
  return dir;
}

nlohmann::json number(double v) {
  if (!std::isfinite(v)) return nullptr;
  return v;
}

nlohmann::json vector_json(const Vec& v) {
  auto arr = nlohmann::json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) arr.push_back(number(v(i)));
  return arr;
}

int cmd_partition(const RunConfig& cfg) {
  const auto spec = load(cfg);
  const Mode mode = mode_of(cfg, Mode::kStandard);
  if (mode == Mode::kNominal) throw ConfigFailure("partition supports --standard or --adaptive");
  const auto dir = prepare_out_dir(cfg);

  const ecbf::SafeController controller(spec, mode);
  const auto gc = ecbf::classify_grid(controller, spec.domain,
                                      std::vector<int>(spec.state_dim(), cfg.resolution),
                                      cfg.threads);
  {
    std::ofstream csv(dir / "partition.csv");
    ecbf::write_partition_csv(csv, gc);
  }
  const auto census = ecbf::region_census(gc);
  {
    std::ofstream out(dir / "census.txt");
    ecbf::write_census(out, spec, mode, census);
    if (cfg.refine) {
      const auto ref = ecbf::refine_boundaries(controller, gc);
      out << "# refinement x" << ref.factor << " band " << ref.band << ": " << ref.samples
          << " samples around " << ref.boundary_cells << " boundary cells\n";
      for (const auto& [label, count] : ref.census) out << "refined " << label << ' ' << count << '\n';
    }
  }
  ecbf::write_census(std::cout, spec, mode, census);

  std::size_t failures = 0;
  std::size_t unsafe_infeasible = 0;
  for (const auto& c : gc.cells) {
    if (c.error) ++failures;
    if (c.sol.feasible() && c.kkt_residual > 1e-8) ++failures;
    if (mode == Mode::kAdaptive && c.b_val > 0.0 && !c.feasible()) ++unsafe_infeasible;
  }
  if (mode == Mode::kAdaptive) {
    std::cout << "infeasible cells with B>0: " << unsafe_infeasible << '\n';
  }
  if (static_cast<double>(failures) > 1e-3 * static_cast<double>(gc.size())) {
    std::cerr << "numerical failure on " << failures << " of " << gc.size() << " cells\n";
    return kNumerical;
  }
  return kOk;
}

int cmd_eval(const RunConfig& cfg) {
  const auto spec = load(cfg);
  const Mode mode = mode_of(cfg, Mode::kStandard);
  if (mode == Mode::kNominal) throw ConfigFailure("eval supports --standard or --adaptive");
  const Vec x = parse_state(cfg.state, spec.state_dim());
  if (!spec.domain.contains(x)) throw ConfigFailure("state lies outside the domain box");

  const ecbf::SafeController controller(spec, mode);
  const auto sol = controller.solve(x);
  nlohmann::json rec;
  rec["x"] = vector_json(x);
  rec["mode"] = std::string(ecbf::to_string(mode));
  rec["case"] = std::string(ecbf::to_string(sol.case_tag));
  rec["active_set"] = ecbf::label_string(sol);
  rec["feasible"] = sol.feasible();
  rec["u"] = vector_json(sol.u_star);
  rec["lambda"] = number(sol.lambda);
  rec["mu"] = vector_json(sol.mu);
  rec["s"] = number(sol.s_star);
  rec["B"] = spec.barrier.value(x);
  if (sol.feasible()) {
    rec["kkt_residual"] = controller.kkt_residual(x, sol);
  } else {
    rec["reason"] = sol.reason;
    if (sol.has_certificate) rec["certificate"] = sol.certificate;
  }
  if (mode == Mode::kAdaptive) {
    rec["near_degenerate"] = sol.near_degenerate;
    rec["outside_safe_set"] = sol.outside_safe_set;
  }
  std::cout << rec.dump() << '\n';
  return sol.feasible() ? kOk : kInfeasible;
}

struct VerifyStats {
  double max_u_dev = 0.0;
  double max_s_dev = 0.0;  // relative to max(1, |s|)
  double max_residual = 0.0;
  std::size_t compared = 0;
  std::size_t oracle_infeasible = 0;
  std::size_t status_mismatch = 0;
  std::optional<Vec> counterexample;
  std::string counter_reason;
};

int cmd_verify(const RunConfig& cfg) {
  const auto spec = load(cfg);
  const auto dir = prepare_out_dir(cfg);
  std::mt19937_64 rng(cfg.seed);
  const int n = spec.state_dim();
  std::vector<std::uniform_real_distribution<double>> axes;
  for (int d = 0; d < n; ++d) axes.emplace_back(spec.domain.lo(d), spec.domain.hi(d));

  const ecbf::ExplicitController standard(spec);
  const ecbf::AdaptiveController adaptive(spec);
  VerifyStats st_std;
  VerifyStats st_ad;
  const double res_tol = cfg.tol <= 0.0 ? 0.0 : 1e-8;

  auto flag = [&](VerifyStats& st, const Vec& x, const std::string& why) {
    if (!st.counterexample) {
      st.counterexample = x;
      st.counter_reason = why;
    }
  };

  for (int k = 0; k < cfg.samples; ++k) {
    Vec x(n);
    for (int d = 0; d < n; ++d) x(d) = axes[d](rng);

    {
      const auto ex = standard.solve(x);
      const auto orc = ecbf::oracle_standard(spec, x);
      if (!orc.feasible()) {
        ++st_std.oracle_infeasible;
        if (ex.feasible()) {
          ++st_std.status_mismatch;
          flag(st_std, x, "explicit feasible, oracle infeasible");
        }
      } else if (!ex.feasible()) {
        ++st_std.status_mismatch;
        flag(st_std, x, "oracle feasible, explicit infeasible");
      } else {
        ++st_std.compared;
        const double dev = (ex.u_star - orc.u_star).lpNorm<Eigen::Infinity>();
        const double res = ecbf::kkt_residual(spec, x, ex);
        st_std.max_u_dev = std::max(st_std.max_u_dev, dev);
        st_std.max_residual = std::max(st_std.max_residual, res);
        if (dev > cfg.tol) flag(st_std, x, "u deviation " + ecbf::format_double(dev));
        if (res > res_tol) flag(st_std, x, "KKT residual " + ecbf::format_double(res));
      }
    }
    {
      const auto ex = adaptive.solve(x);
      const auto orc = ecbf::oracle_adaptive(spec, x);
      if (!orc.feasible()) {
        ++st_ad.oracle_infeasible;
        if (ex.feasible()) {
          ++st_ad.status_mismatch;
          flag(st_ad, x, "explicit feasible, oracle infeasible");
        }
      } else if (!ex.feasible()) {
        ++st_ad.status_mismatch;
        flag(st_ad, x, "oracle feasible, explicit infeasible");
      } else {
        ++st_ad.compared;
        const double dev = (ex.u_star - orc.u_star).lpNorm<Eigen::Infinity>();
        const double sdev = std::abs(ex.s_star - orc.s_star) / std::max(1.0, std::abs(orc.s_star));
        const double res = ecbf::ad_kkt_residual(spec, x, ex);
        st_ad.max_u_dev = std::max(st_ad.max_u_dev, dev);
        st_ad.max_s_dev = std::max(st_ad.max_s_dev, sdev);
        st_ad.max_residual = std::max(st_ad.max_residual, res);
        if (dev > cfg.tol) flag(st_ad, x, "u deviation " + ecbf::format_double(dev));
        if (sdev > cfg.tol) flag(st_ad, x, "s deviation " + ecbf::format_double(sdev));
        if (res > res_tol) flag(st_ad, x, "KKT residual " + ecbf::format_double(res));
      }
    }
  }

  std::ofstream report(dir / "verify_report.txt");
  auto write = [&](std::ostream& os, const char* name, const VerifyStats& st) {
    os << name << ": compared " << st.compared << ", oracle infeasible " << st.oracle_infeasible
       << ", status mismatches " << st.status_mismatch << ", max |du| "
       << ecbf::format_double(st.max_u_dev) << ", max rel |ds| " << ecbf::format_double(st.max_s_dev)
       << ", max KKT residual " << ecbf::format_double(st.max_residual) << '\n';
  };
  for (std::ostream* os : {static_cast<std::ostream*>(&report), static_cast<std::ostream*>(&std::cout)}) {
    *os << "samples " << cfg.samples << " seed " << cfg.seed << " tol " << ecbf::format_double(cfg.tol)
        << '\n';
    write(*os, "standard", st_std);
    write(*os, "adaptive", st_ad);
  }

  for (const auto* st : {&st_std, &st_ad}) {
    if (st->counterexample) {
      std::ostringstream os;
      os << (st == &st_std ? "standard" : "adaptive") << " counterexample at x=("
         << ecbf::format_double((*st->counterexample)(0));
      for (Eigen::Index d = 1; d < st->counterexample->size(); ++d) {
        os << ',' << ecbf::format_double((*st->counterexample)(d));
      }
      os << "): " << st->counter_reason;
      report << os.str() << '\n';
      std::cerr << os.str() << '\n';
      return kVerifyFailed;
    }
  }
  return kOk;
}

int cmd_simulate(const RunConfig& cfg) {
  const auto spec = load(cfg);
  const Mode mode = mode_of(cfg, Mode::kAdaptive);
  const Vec x0 = parse_state(cfg.state, spec.state_dim());
  if (!spec.domain.contains(x0)) throw ConfigFailure("initial state lies outside the domain box");
  const auto dir = prepare_out_dir(cfg);

  const auto traj = ecbf::simulate(ecbf::SafeController(spec, mode), x0, cfg.t_final, cfg.step);
  {
    std::ofstream csv(dir / "trajectory.csv");
    ecbf::write_trajectory_csv(csv, traj);
  }
  std::cout << "mode " << ecbf::to_string(mode) << ", status " << ecbf::to_string(traj.status)
            << ", steps " << (traj.points.empty() ? 0 : traj.points.size() - 1) << '\n';
  if (!traj.points.empty()) {
    std::cout << "min barrier " << ecbf::format_double(ecbf::min_barrier(traj)) << '\n';
  }
  if (traj.barrier_crossing_time) {
    std::cout << "barrier crossed below 0 at t=" << ecbf::format_double(*traj.barrier_crossing_time)
              << '\n';
  }
  if (traj.status == ecbf::SimStatus::kControllerFailure) {
    std::ostringstream os;
    os << "controller failure at x=(";
    for (Eigen::Index d = 0; d < traj.failure_state->size(); ++d) {
      os << (d ? "," : "") << ecbf::format_double((*traj.failure_state)(d));
    }
    os << "): " << traj.message;
    std::cerr << os.str() << '\n';
    return kControllerFailure;
  }
  if (traj.status == ecbf::SimStatus::kLeftDomain) std::cout << traj.message << '\n';
  if (traj.points.empty() || ecbf::min_barrier(traj) < -1e-3) return kUnsafe;
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Explicit control-barrier-function QP toolkit"};
  app.require_subcommand(1);
  RunConfig cfg;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("problem", cfg.problem, "Problem configuration (JSON)")->required();
    sub->add_option("--p-s", cfg.p_s, "Override the adaptive penalty p_s");
    sub->add_option("--out-dir", cfg.out_dir, "Directory for output files");
  };
  auto add_mode = [&](CLI::App* sub) {
    auto* s = sub->add_flag("--standard", cfg.standard, "Standard CBF-QP");
    auto* a = sub->add_flag("--adaptive", cfg.adaptive, "Adaptive CBF-QP");
    s->excludes(a);
    return std::pair{s, a};
  };

  auto* partition = app.add_subcommand("partition", "Classify a state grid into critical regions");
  add_common(partition);
  add_mode(partition);
  partition->add_option("-r,--resolution", cfg.resolution, "Grid points per axis")
      ->check(CLI::Range(2, 100000));
  partition->add_option("--threads", cfg.threads, "Worker threads");
  partition->add_flag("--refine", cfg.refine, "Report a 4x boundary refinement pass");

  auto* eval = app.add_subcommand("eval", "Evaluate the explicit controller at one state");
  add_common(eval);
  add_mode(eval);
  eval->add_option("-x", cfg.state, "State, comma separated")->required();

  auto* verify = app.add_subcommand("verify", "Compare explicit solutions with the oracle");
  add_common(verify);
  verify->add_option("-n,--samples", cfg.samples, "Number of sampled states")->check(CLI::PositiveNumber);
  verify->add_option("--seed", cfg.seed, "Sampling seed");
  verify->add_option("--tol", cfg.tol, "Max allowed deviation from the oracle");

  auto* sim = app.add_subcommand("simulate", "Closed-loop simulation");
  add_common(sim);
  auto [s_flag, a_flag] = add_mode(sim);
  auto* n_flag = sim->add_flag("--nominal", cfg.nominal, "Apply u_des without filtering");
  n_flag->excludes(s_flag)->excludes(a_flag);
  sim->add_option("-x", cfg.state, "Initial state, comma separated")->required();
  sim->add_option("--t-final", cfg.t_final, "Horizon")->check(CLI::PositiveNumber);
  sim->add_option("--step", cfg.step, "Integration step")->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kConfig;
  }

  try {
    if (*partition) return cmd_partition(cfg);
    if (*eval) return cmd_eval(cfg);
    if (*verify) return cmd_verify(cfg);
    if (*sim) return cmd_simulate(cfg);
  } catch (const ConfigFailure& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kConfig;
  } catch (const ecbf::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    if (e.code() == ecbf::ErrorCode::kConfigError || e.code() == ecbf::ErrorCode::kPreconditionViolated) {
      return kConfig;
    }
    return kNumerical;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kNumerical;
  }
  return kOk;
}
