#pragma once

#include <string>
#include <vector>

#include "maxdual/maximal.hpp"

namespace maxdual {

// Finite test set of cubes standing in for "sup over all cubes Q".  Every
// probe report embeds the family hash, since a supremum surrogate is
// meaningless without its family.
struct CubeFamily {
  std::string name;
  std::vector<Cube> cubes;

  std::uint64_t hash() const;
};

// All lattice-aligned cubes at resolution level mprime (every corner, every
// side), inside the computational box.
CubeFamily all_lattice_aligned(int n, int mprime);
// All cubes of one shifted grid meeting the box, levels [level_min, m].
CubeFamily grid_cubes(const ShiftedGrid& g, int m, int level_min = -1);
// Seeded random tick-aligned cubes inside the computational box.
CubeFamily random_cubes(int n, std::uint64_t seed, std::size_t count);
// Lattice-aligned cubes inside the support box (coarser corner stride),
// cheap enough for norm-based suprema.
CubeFamily support_blocks(int n, int m, int max_depth);

// [v]_{A_p} over the family: sup of avg(v) * avg(v^{-1/(p-1)})^{p-1}.
// The detail variant reports the attaining cube (first in family order wins
// ties, so argmax reporting is deterministic).
struct ApDetail {
  double value = 0.0;
  std::size_t argmax = 0;
};
ApDetail ap_constant_detail(const WeightField& v, double p, const CubeFamily& F);
double ap_constant(const WeightField& v, double p, const CubeFamily& F);

// Curve r -> c(r) = sup_Q avg(v^r)^{1/r} / avg(v).
ProbeReport reverse_holder_probe(const WeightField& v, const CubeFamily& F,
                                 const std::vector<double>& r_grid);

// Samples (Q, E subset Q) and fits envelopes for
//   v(E)/v(Q) <= c (|E|/|Q|)^theta    (upper: absolute continuity)
//   v(E)/v(Q) >= c'(|E|/|Q|)^s        (lower: converse growth)
// by log-log regression; reports fitted exponents and worst residuals.
ProbeReport ainfty_envelope_probe(const WeightField& v, const CubeFamily& F,
                                  std::uint64_t seed, std::size_t samples);

// Verifies v(Q)/v(E) <= (|Q|/|E|)^p [v]_{A_p} for sampled E subset Q in F.
ProbeReport converse_volume_check(const WeightField& v, double p, const CubeFamily& F,
                                  std::uint64_t seed, std::size_t samples);

// Truncated majorant series R g = sum_{k<N} M^k g / (2A)^k.  The tail field
// carries the exact cellwise truncation term 2A * M^N g / (2A)^N, so
// M(Rg) <= 2A Rg + tail holds cellwise by construction.
struct RdfResult {
  LatticeFunction majorant;
  LatticeFunction tail;
  std::vector<double> term_sup;  // sup-norm of each series term
  double ratio = 0.0;            // last-terms ratio (geometric extrapolation)
  double tail_estimate = 0.0;    // scalar extrapolated tail
  bool diverged = false;
};

RdfResult rubio_de_francia(const LatticeFunction& g, const MaximalKind& kind, double A, int terms);

// sup over cells of M v / v: the empirical A_1 constant of v.
double a1_ratio(const WeightField& v, const MaximalKind& kind);

// Variable-exponent Muckenhoupt constant over the family:
// sup |Q|^-1 ||chi_Q||_{L^p_w} ||chi_Q||_{L^p'_{1/w}}.
double apvar_constant(const ExponentField& p, const WeightField& w, const CubeFamily& F);

}  // namespace maxdual
