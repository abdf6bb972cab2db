#include "ecbf/partition.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <ostream>
#include <set>
#include <thread>

#include "kkt_system.hpp"

namespace ecbf {

std::vector<IndexSet> enumerate_active_sets(int p) {
  if (p > 20) {
    throw Error(ErrorCode::kTooManyLimits, std::to_string(p) + " limit rows exceed 20");
  }
  std::vector<IndexSet> out;
  for (int k = 1; k <= p; ++k) {
    auto level = combinations(p, k);
    out.insert(out.end(), level.begin(), level.end());
  }
  return out;
}

std::vector<IndexSet> prune_rank_deficient(const ControlPolytope& limits,
                                           const std::vector<IndexSet>& sets) {
  std::vector<IndexSet> out;
  for (const auto& s : sets) {
    if (full_row_rank(select_rows(limits.A, s))) out.push_back(s);
  }
  return out;
}

std::string CellRecord::label() const {
  if (error) return "error";
  return label_string(sol);
}

double grid_coordinate(double lo, double hi, int n, int i) {
  if (i == n - 1) return hi;
  return lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1);
}

namespace {

std::size_t cell_count(const std::vector<int>& res) {
  std::size_t total = 1;
  for (int r : res) total *= static_cast<std::size_t>(r);
  return total;
}

std::vector<int> unravel(std::size_t flat, const std::vector<int>& res) {
  std::vector<int> idx(res.size());
  for (std::size_t d = res.size(); d-- > 0;) {
    idx[d] = static_cast<int>(flat % res[d]);
    flat /= res[d];
  }
  return idx;
}

std::size_t ravel(const std::vector<int>& idx, const std::vector<int>& res) {
  std::size_t flat = 0;
  for (std::size_t d = 0; d < res.size(); ++d) flat = flat * res[d] + idx[d];
  return flat;
}

Vec lattice_point(const Box& box, const std::vector<int>& res, const std::vector<int>& idx) {
  Vec x(static_cast<Eigen::Index>(res.size()));
  for (std::size_t d = 0; d < res.size(); ++d) {
    x(d) = grid_coordinate(box.lo(d), box.hi(d), res[d], idx[d]);
  }
  return x;
}

CellRecord evaluate_cell(const SafeController& controller, const Vec& x) {
  CellRecord rec;
  rec.x = x;
  rec.b_val = controller.spec().barrier.value(x);
  try {
    rec.sol = controller.solve(x);
    if (rec.sol.feasible()) rec.kkt_residual = controller.kkt_residual(x, rec.sol);
  } catch (const Error& e) {
    rec.error = e.code();
    rec.sol.case_tag = CaseTag::kInfeasible;
    rec.sol.reason = e.what();
  }
  return rec;
}

template <typename Fn>
void parallel_for(std::size_t n, unsigned threads, Fn&& fn) {
  threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(std::max<std::size_t>(n, 1))));
  if (threads == 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::jthread> pool;
  const std::size_t chunk = (n + threads - 1) / threads;
  for (unsigned t = 0; t < threads; ++t) {
    const std::size_t begin = t * chunk;
    const std::size_t end = std::min(n, begin + chunk);
    if (begin >= end) break;
    pool.emplace_back([&fn, begin, end] {
      for (std::size_t i = begin; i < end; ++i) fn(i);
    });
  }
}

}  // namespace

Vec GridClassification::point(const std::vector<int>& index) const {
  return lattice_point(box, resolution, index);
}

GridClassification classify_grid(const SafeController& controller, const Box& box,
                                 const std::vector<int>& resolution, unsigned threads) {
  if (static_cast<int>(resolution.size()) != box.dim()) {
    throw Error(ErrorCode::kPreconditionViolated, "resolution must have one entry per axis");
  }
  for (int r : resolution) {
    if (r < 2) throw Error(ErrorCode::kPreconditionViolated, "resolution must be at least 2");
  }
  GridClassification gc;
  gc.box = box;
  gc.resolution = resolution;
  gc.mode = controller.mode();
  gc.cells.resize(cell_count(resolution));
  parallel_for(gc.cells.size(), threads, [&](std::size_t i) {
    gc.cells[i] = evaluate_cell(controller, lattice_point(box, resolution, unravel(i, resolution)));
  });
  return gc;
}

GridClassification classify_grid(const ProblemSpec& spec, Mode mode,
                                  const std::vector<int>& resolution, unsigned threads) {
  const SafeController controller(spec, mode);
  return classify_grid(controller, spec.domain, resolution, threads);
}

GridClassification classify_grid(const ProblemSpec& spec, Mode mode, int resolution,
                                 unsigned threads) {
  return classify_grid(spec, mode, std::vector<int>(spec.state_dim(), resolution), threads);
}

std::map<std::string, std::size_t> region_census(const GridClassification& gc) {
  std::map<std::string, std::size_t> census;
  for (const auto& cell : gc.cells) ++census[cell.label()];
  return census;
}

std::vector<RegionRow> region_table(const ProblemSpec& spec, Mode mode) {
  const int m = spec.input_dim();
  std::vector<std::string> labels{"0", "b"};
  const int cap = mode == Mode::kAdaptive ? m : m - 1;
  for (const auto& set : detail::cbf_candidate_sets(spec.limits, cap)) {
    labels.push_back(ActiveSetLabel{true, set}.str());
  }
  if (mode == Mode::kStandard) labels.emplace_back("nan");

  std::vector<RegionRow> rows;
  for (std::size_t k = 0; k < labels.size(); ++k) {
    rows.push_back({"CR" + std::to_string(k + 1), labels[k]});
  }
  return rows;
}

void write_census(std::ostream& os, const ProblemSpec& spec, Mode mode,
                  const std::map<std::string, std::size_t>& census) {
  std::set<std::string> listed;
  for (const auto& row : region_table(spec, mode)) {
    const auto it = census.find(row.label);
    os << row.name << ' ' << row.label << ' ' << (it == census.end() ? 0 : it->second) << '\n';
    listed.insert(row.label);
  }
  for (const auto& [label, count] : census) {
    if (!listed.count(label)) os << "-- " << label << ' ' << count << '\n';
  }
}

RefinementReport refine_boundaries(const SafeController& controller, const GridClassification& gc,
                                   int factor, double band) {
  RefinementReport report;
  report.factor = factor;
  report.band = band;
  const auto& res = gc.resolution;
  const std::size_t n = res.size();

  std::vector<std::string> labels(gc.size());
  for (std::size_t i = 0; i < gc.size(); ++i) labels[i] = gc.cells[i].label();

  // Coarse cells with a differently-labelled axis neighbour.
  std::vector<char> boundary(gc.size(), 0);
  for (std::size_t i = 0; i < gc.size(); ++i) {
    auto idx = unravel(i, res);
    for (std::size_t d = 0; d < n && !boundary[i]; ++d) {
      if (idx[d] + 1 < res[d]) {
        auto nb = idx;
        ++nb[d];
        const auto j = ravel(nb, res);
        if (labels[i] != labels[j]) boundary[i] = boundary[j] = 1;
      }
    }
  }
  report.boundary_cells = static_cast<std::size_t>(std::count(boundary.begin(), boundary.end(), 1));

  // Dilate by the half band width measured in coarse cells.
  std::vector<int> radius(n);
  for (std::size_t d = 0; d < n; ++d) {
    const double step = (gc.box.hi(d) - gc.box.lo(d)) / (res[d] - 1);
    radius[d] = static_cast<int>(std::ceil(0.5 * band / step));
  }
  std::vector<char> mask(gc.size(), 0);
  for (std::size_t i = 0; i < gc.size(); ++i) {
    if (!boundary[i]) continue;
    const auto idx = unravel(i, res);
    std::vector<int> span(n);
    for (std::size_t d = 0; d < n; ++d) span[d] = 2 * radius[d] + 1;
    for (std::size_t o = 0; o < cell_count(span); ++o) {
      const auto off = unravel(o, span);
      std::vector<int> nb(n);
      bool inside = true;
      for (std::size_t d = 0; d < n; ++d) {
        nb[d] = idx[d] + off[d] - radius[d];
        inside = inside && nb[d] >= 0 && nb[d] < res[d];
      }
      if (inside) mask[ravel(nb, res)] = 1;
    }
  }

  std::vector<int> fine(n);
  for (std::size_t d = 0; d < n; ++d) fine[d] = (res[d] - 1) * factor + 1;
  for (std::size_t f = 0; f < cell_count(fine); ++f) {
    const auto fidx = unravel(f, fine);
    std::vector<int> coarse(n);
    bool on_coarse = true;
    for (std::size_t d = 0; d < n; ++d) {
      coarse[d] = (fidx[d] + factor / 2) / factor;
      on_coarse = on_coarse && fidx[d] % factor == 0;
    }
    if (on_coarse || !mask[ravel(coarse, res)]) continue;
    const CellRecord rec = evaluate_cell(controller, lattice_point(gc.box, fine, fidx));
    ++report.census[rec.label()];
    ++report.samples;
  }
  return report;
}

ProbeReport continuity_probe(const SafeController& controller, const Vec& a, const Vec& b,
                             std::size_t samples) {
  if (samples < 2) throw Error(ErrorCode::kPreconditionViolated, "need at least two samples");
  ProbeReport rep;
  rep.samples = samples;
  rep.step = (b - a).norm() / static_cast<double>(samples - 1);
  const bool adaptive = controller.mode() == Mode::kAdaptive;

  Vec prev;
  std::string prev_label;
  for (std::size_t k = 0; k < samples; ++k) {
    const double t = static_cast<double>(k) / static_cast<double>(samples - 1);
    const Vec x = a + t * (b - a);
    const AdaptiveSolution sol = controller.solve(x);
    if (!sol.feasible()) {
      throw Error(ErrorCode::kSegmentCrossesInfeasible,
                  "infeasible sample at t=" + format_double(t));
    }
    Vec v(sol.u_star.size() + (adaptive ? 1 : 0));
    v.head(sol.u_star.size()) = sol.u_star;
    if (adaptive) v(v.size() - 1) = sol.s_star;
    const std::string label = sol.active_set.str();
    if (k > 0) {
      const double jump = (v - prev).lpNorm<Eigen::Infinity>();
      const double quotient = jump / rep.step;
      rep.max_jump = std::max(rep.max_jump, jump);
      if (label == prev_label) {
        rep.interior_quotient = std::max(rep.interior_quotient, quotient);
      } else {
        rep.boundary_quotient = std::max(rep.boundary_quotient, quotient);
        rep.crossings.emplace_back(prev_label, label);
      }
    }
    prev = std::move(v);
    prev_label = label;
  }
  if (rep.interior_quotient > 0.0) {
    rep.ratio = rep.boundary_quotient / rep.interior_quotient;
  } else {
    rep.ratio = rep.boundary_quotient > 0.0 ? std::numeric_limits<double>::infinity() : 0.0;
  }
  return rep;
}

ProbeReport continuity_probe(const ProblemSpec& spec, Mode mode, const Vec& a, const Vec& b,
                             std::size_t samples) {
  return continuity_probe(SafeController(spec, mode), a, b, samples);
}

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

void write_partition_csv(std::ostream& os, const GridClassification& gc) {
  const std::size_t n = gc.resolution.size();
  std::size_t m = 0;
  std::size_t p = 0;
  for (const auto& c : gc.cells) {
    m = std::max<std::size_t>(m, c.sol.u_star.size());
    p = std::max<std::size_t>(p, c.sol.mu.size());
  }
  for (std::size_t d = 0; d < n; ++d) os << 'x' << d + 1 << ',';
  os << "case,active_set,feasible";
  for (std::size_t j = 0; j < m; ++j) os << ",u" << j + 1;
  os << ",lambda";
  for (std::size_t j = 0; j < p; ++j) os << ",mu" << j + 1;
  os << ",s,B,kkt_residual\n";

  for (const auto& c : gc.cells) {
    for (std::size_t d = 0; d < n; ++d) os << format_double(c.x(d)) << ',';
    os << (c.error ? std::string(to_string(*c.error)) : std::string(to_string(c.sol.case_tag)))
       << ',' << c.label() << ',' << (c.feasible() ? 1 : 0);
    for (std::size_t j = 0; j < m; ++j) {
      const double u = j < static_cast<std::size_t>(c.sol.u_star.size()) ? c.sol.u_star(j) : NAN;
      os << ',' << format_double(u);
    }
    os << ',' << format_double(c.feasible() ? c.sol.lambda : NAN);
    for (std::size_t j = 0; j < p; ++j) {
      const double mu = j < static_cast<std::size_t>(c.sol.mu.size()) ? c.sol.mu(j) : 0.0;
      os << ',' << format_double(mu);
    }
    os << ',' << format_double(c.feasible() ? c.sol.s_star : NAN) << ',' << format_double(c.b_val)
       << ',' << format_double(c.feasible() ? c.kkt_residual : NAN) << '\n';
  }
}

}  // namespace ecbf
