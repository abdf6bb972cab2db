#pragma once

#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "ecbf/controller.hpp"
#include "ecbf/errors.hpp"

namespace ecbf {

/// Every nonempty subset of the p limit rows, ordered by cardinality then
/// lexicographically. Throws kTooManyLimits for p > 20.
std::vector<IndexSet> enumerate_active_sets(int p);

/// Keeps the sets whose rows of A are linearly independent.
std::vector<IndexSet> prune_rank_deficient(const ControlPolytope& limits,
                                           const std::vector<IndexSet>& sets);

struct CellRecord {
  Vec x;
  AdaptiveSolution sol;
  double b_val = 0.0;
  double kkt_residual = 0.0;
  std::optional<ErrorCode> error;  // set when the cell evaluation threw

  bool feasible() const { return !error && sol.feasible(); }
  /// Active-set label, "nan" for infeasible cells and "error" for failures.
  std::string label() const;
};

struct GridClassification {
  Box box;
  std::vector<int> resolution;  // points per axis, endpoints included
  Mode mode = Mode::kStandard;
  std::vector<CellRecord> cells;  // row-major, last axis fastest

  std::size_t size() const { return cells.size(); }
  Vec point(const std::vector<int>& index) const;
};

/// Grid point coordinates along one axis: lo + i (hi - lo) / (n - 1).
double grid_coordinate(double lo, double hi, int n, int i);

/// Classifies every grid point. Cell failures are recorded per cell.
/// `threads` > 1 splits the cells into contiguous chunks; output order is
/// independent of the thread count.
GridClassification classify_grid(const ProblemSpec& spec, Mode mode,
                                 const std::vector<int>& resolution, unsigned threads = 1);
GridClassification classify_grid(const ProblemSpec& spec, Mode mode, int resolution,
                                 unsigned threads = 1);
GridClassification classify_grid(const SafeController& controller, const Box& box,
                                 const std::vector<int>& resolution, unsigned threads = 1);

/// Label -> number of cells.
std::map<std::string, std::size_t> region_census(const GridClassification& gc);

/// Critical-region naming in table order: CR1 = CBF inactive, CR2 = CBF only,
/// then CBF plus each surviving limit set; the standard mode appends the
/// infeasible region.
struct RegionRow {
  std::string name;   // "CR1", "CR2", ...
  std::string label;  // "0", "b", "b+1", ..., "nan"
};
std::vector<RegionRow> region_table(const ProblemSpec& spec, Mode mode);

/// Writes "name label count" lines in table order, followed by any observed
/// label outside the table.
void write_census(std::ostream& os, const ProblemSpec& spec, Mode mode,
                  const std::map<std::string, std::size_t>& census);

struct RefinementReport {
  int factor = 4;
  double band = 0.1;
  std::size_t boundary_cells = 0;
  std::size_t samples = 0;
  std::map<std::string, std::size_t> census;  // labels seen on the fine lattice
};

/// Re-evaluates a lattice `factor` times finer than the grid, restricted to a
/// band of total width `band` around coarse cells whose neighbours carry a
/// different label. Finds thin critical regions the coarse grid misses.
RefinementReport refine_boundaries(const SafeController& controller, const GridClassification& gc,
                                   int factor = 4, double band = 0.1);

struct ProbeReport {
  std::size_t samples = 0;
  double step = 0.0;
  double max_jump = 0.0;            // max adjacent |delta (u, s)|_inf
  double interior_quotient = 0.0;   // max |delta|/step between same-label samples
  double boundary_quotient = 0.0;   // max |delta|/step across a label change
  double ratio = 0.0;               // boundary / interior
  std::vector<std::pair<std::string, std::string>> crossings;
};

/// Samples the controller along the segment a -> b. Throws
/// kSegmentCrossesInfeasible when any sample is infeasible.
ProbeReport continuity_probe(const SafeController& controller, const Vec& a, const Vec& b,
                             std::size_t samples);
ProbeReport continuity_probe(const ProblemSpec& spec, Mode mode, const Vec& a, const Vec& b,
                             std::size_t samples);

/// CSV: x1..xn,case,active_set,feasible,u1..um,lambda,mu1..mup,s,B,kkt_residual.
void write_partition_csv(std::ostream& os, const GridClassification& gc);

/// Shortest round-trip decimal representation.
std::string format_double(double v);

}  // namespace ecbf
