#pragma once

#include <string>
#include <utility>
#include <vector>

#include "maxdual/lattice.hpp"
#include "maxdual/varlp.hpp"

namespace maxdual {

// Which discrete maximal operator to evaluate.  All kinds act on |f| and are
// sampled at cell centers.
//  - Full: averages over every lattice-aligned cube with side t*h,
//    t = 1..3*2^m, containing the center (windows are clipped into the box;
//    one-cell windows realize the value |f(x)| itself).
//  - Grid: averages over the cubes of one shifted dyadic grid with side
//    between h and 16 (levels -4..m); coarse levels are included so that
//    every lattice window has a 6^n-volume grid cover in the family.
//  - LocalDyadic: averages over the repeated halvings of a base cube Q0,
//    down to cell scale; zero outside Q0.
struct MaximalKind {
  enum class Type { Full, Grid, LocalDyadic } type = Type::Full;
  ShiftedGrid grid;
  Cube q0;

  static MaximalKind full() { return MaximalKind{Type::Full, {}, {}}; }
  static MaximalKind grid_kind(const ShiftedGrid& g) { return MaximalKind{Type::Grid, g, {}}; }
  static MaximalKind local(const Cube& q0) { return MaximalKind{Type::LocalDyadic, {}, q0}; }
  std::string label() const;
};

inline constexpr int kGridMaximalTopLevel = -4;

// Integrals of a fixed nonnegative lattice function over all cubes of one
// grid, levels [level_min, m], built bottom-up (children tile their parent
// exactly, so the aggregation is lossless).
class GridIntegralTable {
 public:
  GridIntegralTable(const LatticeFunction& f_abs, const ShiftedGrid& g, int level_min);

  const ShiftedGrid& grid() const { return grid_; }
  int level_min() const { return level_min_; }
  int level_max() const { return level_max_; }

  // Zero for cubes outside the stored (box-meeting) index range.
  double integral_of(int level, std::int64_t jx, std::int64_t jy = 0) const;
  double average_of(int level, std::int64_t jx, std::int64_t jy = 0) const;
  double average_of(const GridCube& gc) const { return average_of(gc.level, gc.idx[0], gc.idx[1]); }

  // Extends the table upward with coarser levels.
  void extend_top(int new_level_min);

  std::int64_t jx_begin(int level) const;
  std::int64_t jx_end(int level) const;
  std::int64_t jy_begin(int level) const;
  std::int64_t jy_end(int level) const;

 private:
  struct Level {
    std::int64_t jx0, jx1, jy0, jy1;
    std::vector<double> integral;
  };
  const Level& at(int level) const { return levels_[static_cast<std::size_t>(level - level_min_)]; }
  void build_level(int level, const LatticeFunction* f);

  ShiftedGrid grid_;
  int level_min_, level_max_;
  int n_;
  Box box_;
  std::vector<Level> levels_;  // index 0 = level_min_
  const LatticeFunction* source_;
};

LatticeFunction maximal(const LatticeFunction& f, const MaximalKind& kind);

// Grid maximal from a prebuilt table (used by the CZ machinery so the
// stopping-time construction and its certificates share one cube family).
LatticeFunction grid_maximal_from_table(const LatticeFunction& f, const GridIntegralTable& table);

// Pointwise comparison of the full maximal function against
// 6^n * sum over the 3^n shifted grids; reports the worst signed violation.
ProbeReport check_grid_comparison(const LatticeFunction& f);

// Deterministic candidate generator for operator-norm lower bounds: seeded
// random profiles, cell spikes, dyadic blocks, truncated power spikes and
// weight-adapted extremal profiles.
struct CandidateFamily {
  std::string name = "standard";
  std::uint64_t seed = 7;
  int random_count = 6;
  int cell_spikes = 2;
  int dyadic_blocks = 4;
  int power_spikes = 2;
  int weight_adapted = 5;
  bool include_constant = true;

  std::uint64_t hash(int n, int m) const;
};

std::vector<std::pair<std::string, LatticeFunction>> generate_candidates(
    const CandidateFamily& fam, int n, int m, const ExponentField& p, const WeightField& w);

// ||M f||_{L^p_w} / ||f||_{L^p_w}; empty when ||f|| is zero or not finite.
std::optional<double> maximal_norm_ratio(const MaximalKind& kind, const ExponentField& p,
                                         const WeightField& w, const LatticeFunction& f);

struct OperatorNormEstimate {
  double value = 0.0;        // max ratio found: an empirical lower bound
  std::string argmax;        // candidate label attaining it
  ProbeReport report;
};

OperatorNormEstimate operator_norm_lower_bound(const MaximalKind& kind, const ExponentField& p,
                                               const WeightField& w, const CandidateFamily& fam);

// Both spaces at once (X = L^p_w and its associate); shares the maximal
// function across the two ratios.
struct DualNormEstimates {
  OperatorNormEstimate primal;
  OperatorNormEstimate dual;
};
DualNormEstimates dual_operator_norm_lower_bounds(const MaximalKind& kind, const ExponentField& p,
                                                  const WeightField& w, const CandidateFamily& fam);

namespace ref {

// Straightforward serial implementations kept as oracles for the kernels.
LatticeFunction maximal_full(const LatticeFunction& f);
LatticeFunction maximal_grid(const LatticeFunction& f, const ShiftedGrid& g, int level_min);

}  // namespace ref

}  // namespace maxdual
