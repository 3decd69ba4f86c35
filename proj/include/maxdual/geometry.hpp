#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace maxdual {

// All coordinates are exact fixed-point "ticks": 1 length unit = kTickDen
// ticks, kTickDen = 3 * 2^40.  With this denominator both the binary lattice
// (cell side 2^-m, m <= 12) and every shifted dyadic grid corner (an integer
// multiple of 2^-k/3) are exactly representable, so containment and clipping
// are integer comparisons.
using Tick = std::int64_t;

inline constexpr int kTickShift = 40;
inline constexpr Tick kTickDen = Tick(3) << kTickShift;

// Coarsest and finest grid levels handled by tick arithmetic.  Levels are
// "k" in cube side 2^-k; negative k means sides larger than one unit.
inline constexpr int kMinGridLevel = -20;
inline constexpr int kMaxGridLevel = kTickShift - 1;

inline double tick_to_unit(Tick t) { return static_cast<double>(t) / static_cast<double>(kTickDen); }

// Axis-aligned box, possibly with different extents per axis.  Used both as
// the computational domain and as an integration region.
struct Box {
  int n = 1;
  std::array<Tick, 2> lo{0, 0};
  std::array<Tick, 2> len{0, 0};

  Tick hi(int axis) const { return lo[axis] + len[axis]; }
  bool empty() const;
  double volume_units() const;
};

// Computational box [-1,2)^n and the support box [0,1)^n for test functions.
Box computational_box(int n);
Box support_box(int n);

Box intersect(const Box& a, const Box& b);
bool box_contains(const Box& outer, const Box& inner);

// An axis-aligned cube (equal extent per axis).
struct Cube {
  int n = 1;
  std::array<Tick, 2> lo{0, 0};
  Tick side = 0;

  Box box() const {
    return Box{n, lo, {side, n == 2 ? side : Tick(0)}};
  }
  double side_units() const { return tick_to_unit(side); }
  double volume_units() const;
  bool contains(const Cube& inner) const;
  bool contains_point(const std::array<Tick, 2>& p) const;
};

// One of the 3^n shifted dyadic grids.  Cubes at level k are
// 2^-k([0,1)^n + j + (-1)^k a) with per-axis shift a = s/3, s in {0,1,2}.
// The alternating sign makes consecutive levels nest.
struct ShiftedGrid {
  int n = 1;
  std::array<int, 2> s{0, 0};  // 3 * shift per axis

  bool operator==(const ShiftedGrid& o) const { return n == o.n && s == o.s; }
  std::string label() const;
};

// Grid-addressed cube: (grid, level k, index j).
struct GridCube {
  ShiftedGrid grid;
  int level = 0;
  std::array<std::int64_t, 2> idx{0, 0};

  bool operator==(const GridCube& o) const {
    return grid == o.grid && level == o.level && idx == o.idx;
  }
};

// 3^n grids; the all-zero shift comes first and is the standard dyadic grid.
std::vector<ShiftedGrid> build_shifted_grids(int n);

// Realized tick corner of grid cube (level, j) along one axis.
Tick grid_corner(const ShiftedGrid& g, int axis, int level, std::int64_t j);
Tick grid_side(int level);

Cube realize(const GridCube& gc);

// Index of the level-k cube of g containing the point, per axis.
std::int64_t grid_locate(const ShiftedGrid& g, int axis, int level, Tick x);
GridCube grid_cube_at(const ShiftedGrid& g, int level, const std::array<Tick, 2>& p);

// Parent / children in the grid tree.  A child index j' satisfies
// j' = 2 j_parent + (-1)^{k_parent} s + {0,1} per axis.
GridCube parent(const GridCube& gc);
std::vector<GridCube> children(const GridCube& gc);

struct CoverResult {
  ShiftedGrid grid;
  GridCube gcube;
  Cube cube;
};

// Smallest-level shifted-grid cube containing q with volume at most 6^n |q|.
// If q coincides with a grid cube it is returned as its own cover.
CoverResult cover_cube(const Cube& q);

// FNV-1a over a byte view; used to fingerprint cube families in reports.
std::uint64_t fnv1a(std::uint64_t h, const void* data, std::size_t len);
inline constexpr std::uint64_t kFnvBasis = 1469598103934665603ULL;

}  // namespace maxdual
