#pragma once

#include <map>
#include <memory>
#include <optional>
#include <vector>

#include "maxdual/maximal.hpp"

namespace maxdual {

// One selected stopping cube: the maximal grid cube whose |f|-average
// exceeds the level threshold.
struct CZCube {
  Cube cube;
  std::optional<GridCube> addr;  // grid address (absent for local subdivisions)
  double avg = 0.0;              // |f|-average over the cube
};

// Stopping-time decomposition on one dyadic grid (or on the subdivision
// tree of a base cube).  Level k holds the pairwise disjoint maximal cubes
// whose union is { M f > threshold(k) }.  For the global variant the grid
// family is extended upward until no top-level cube can be selected, so
// every selected cube has a parent witness with average <= threshold(k).
struct CZDecomposition {
  double gamma = 2.0;
  ShiftedGrid grid;
  bool local = false;
  Cube q0;                    // base cube (local variant)
  double base_average = 1.0;  // |f|_{Q0} for local, 1 for global
  int k_lo = 0, k_hi = -1;    // enumerated range; empty when k_hi < k_lo
  std::vector<std::vector<CZCube>> levels;
  std::shared_ptr<GridIntegralTable> table;  // global variant only

  bool empty() const { return k_hi < k_lo; }
  double threshold(int k) const;
  const std::vector<CZCube>& cubes_at(int k) const;
  std::size_t total_cubes() const;
};

// Global stopping-time decomposition of |f| over one shifted grid.
// Throws on gamma <= 1; a zero function yields an empty decomposition.
CZDecomposition cz_decompose(const LatticeFunction& f, const ShiftedGrid& grid, double gamma);

// Local variant on the subdivision tree of q0 with thresholds
// gamma^k |f|_{Q0}, k >= 1.  Requires |f|_{Q0} > 0.
CZDecomposition cz_decompose_local(const LatticeFunction& f, const Cube& q0, double gamma);

// Level-shrinkage check: |Q_j^k n Omega_{k+l}| <= 2^n gamma^-l |Q_j^k|
// for every selected cube and l in [0, l_max].
ProbeReport check_level_shrinkage(const CZDecomposition& cz, int l_max = 6);

// Telescoping identity of the level sets, as an exact cell-set statement on
// the grid's own level-m mesh (clipped to the box), for nu in [1, nu_max].
ProbeReport check_level_telescoping(const CZDecomposition& cz, int nu_max = 3);

// eta-sparse family: each cube owns E(Q) = Q minus the next-level selected
// cubes inside it, stored symbolically with exact volume.
struct SparseEntry {
  GridCube q;
  int k = 0;                     // threshold index of the selected cube
  std::vector<GridCube> removed; // pairwise disjoint grid subcubes of q
  double volume = 0.0;           // |Q|
  double e_volume = 0.0;         // |E(Q)|
  double f_avg = 0.0;            // average of the generating f over Q
};

struct SparseFamily {
  double eta = 0.5;
  ShiftedGrid grid;
  std::vector<SparseEntry> entries;

  std::uint64_t hash() const;
};

// Builds the eta-sparse family from the stopping decomposition with
// gamma = 2^n/(1-eta) and certifies the pointwise domination
// M f <= (2^n/(1-eta)) sum f_Q chi_E(Q) at every cell center.
struct SparseResult {
  SparseFamily family;
  CZDecomposition decomposition;
  ProbeReport certificate;
};
SparseResult sparse_from_maximal(const LatticeFunction& f, const ShiftedGrid& grid, double eta);

// Exact sparsity / disjointness verification of a family.
ProbeReport verify_sparse_family(const SparseFamily& s);

// sum_Q (avg_Q f) chi_E(Q), sampled at cell centers.
LatticeFunction sparse_operator(const SparseFamily& s, const LatticeFunction& f);

// sum_Q (|Q|^-1 int_E(Q) f) chi_Q, sampled at cell centers.
LatticeFunction adjoint_sparse_operator(const SparseFamily& s, const LatticeFunction& f);

// Exact pairings  int (M_S f) g  and  int f (M_S* g)  by clipped-cell
// quadrature of the piecewise forms; they agree up to rounding.
double pairing_with_sparse(const SparseFamily& s, const LatticeFunction& f, const LatticeFunction& g);
double pairing_with_adjoint(const SparseFamily& s, const LatticeFunction& f, const LatticeFunction& g);

// JSON serialization per the family schema (grid shift, level, index,
// E description, |E|).
std::string to_json(const SparseFamily& s);

}  // namespace maxdual
