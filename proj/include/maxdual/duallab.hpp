#pragma once

#include <functional>
#include <optional>

#include "maxdual/czsparse.hpp"
#include "maxdual/weights.hpp"

namespace maxdual {

// The pair (p(.), w) under study, with the derived conjugate-exponent and
// inverse-weight fields validated at construction.
struct SpaceSpec {
  ExponentField p;
  WeightField w;
  ExponentField p_conj;
  WeightField w_inv;
  int n = 1, m = 8;
  std::string p_name = "?", w_name = "?";

  static SpaceSpec make(ExponentField p, WeightField w,
                        std::string p_name = "?", std::string w_name = "?");
  // Cellwise w^p as a weight (the object whose Muckenhoupt behavior gates
  // the reverse-Holder probes).
  WeightField weight_power_p() const;
};

// Constants used across the scale-threshold machinery.  Every pick is
// recorded in the pipeline report.
struct LemmaConstants {
  double r = 1.25;        // r-mean exponent
  double c = 1.0;         // empirical constant of the family r-mean bound
  double k = 1.0;         // 2^{p_+/p_- + 1} c
  double s = 2.0;         // Muckenhoupt index chosen for w^p
  double nu = 2.0;        // reverse-Holder exponent chosen for w^p
  double gamma = 1.1;     // in (1, min(nu, r))
  double eps = 0.0;       // (r - gamma) / (gamma (1 + (s-1) r))
  double q = 1.0;         // (1 + r(s-1)) / (1 + gamma(s-1))
  double eta_exp = 0.0;   // (eps/(1+eps)) p_-
  double sparse_eta = 0.5;
};

// Builds the constants from the space: r fixed, c from the family r-mean
// probe times a safety factor 2, s and nu from the weight probes, gamma the
// midpoint of (1, min(nu, r)), eps/q/eta by the closed formulas.
struct ConstantsPipelineResult {
  LemmaConstants constants;
  ProbeReport report;
};
ConstantsPipelineResult constants_pipeline(const SpaceSpec& space, std::uint64_t seed,
                                           double r = 1.25, std::size_t rmean_trials = 100);

// int_region (t w(x))^{scale p(x)} dx, exact over clipped cells.
double powered_region_integral(const ExponentField& p, const WeightField& w, const Box& region,
                               double t, double scale);

// Volume-weighted median exponent over a cube with the half-volume splits.
struct MedianExponent {
  double value = 0.0;
  double vol_below = 0.0;   // |{p < m}|
  double vol_above = 0.0;   // |{p > m}|
  double vol_e1 = 0.0;      // |{p <= m}|
  double vol_e2 = 0.0;      // |{p >= m}|
  bool half_volume_ok = false;
};
MedianExponent median_exponent(const ExponentField& p, const Box& region);

// Norm-ratio probe over random sparse families: measures
// || sum a_Q chi_{G_Q} || / || sum a_Q chi_Q || against the subset density
// rho = max |G_Q|/|Q| and fits the power law  R ~ c rho^delta.
struct SparseEmbeddingOptions {
  std::size_t trials = 24;
  double eta = 0.5;
  std::vector<int> density_exponents = {1, 2, 3, 4, 5, 6, 7, 8};  // rho = 2^-d
  std::uint64_t seed = 7;
  enum class Shape { Mixed, SingleCube } shape = Shape::Mixed;
};
ProbeReport sparse_embedding_probe(const SpaceSpec& space, const SparseEmbeddingOptions& opt);

// Normalized disjoint-family r-mean probe: families (pi, {t_Q}) rescaled so
// sum_Q int_Q (t_Q w)^p = 1; reports the curve r -> max over trials of
// sum_Q |Q| (avg (t_Q w)^{r p})^{1/r}.
ProbeReport family_rmean_probe(const SpaceSpec& space, const std::vector<double>& r_grid,
                               std::size_t trials, std::uint64_t seed);

// Critical scale of a cube: t_Q = sup of the t <= t_max(Q) at which the
// r-mean side exceeds k times the modular side, located by a descending
// log-grid scan plus bisection; budget b(Q) is the r-mean at t_Q.
struct CriticalScale {
  double t_q = 0.0;
  double budget = 0.0;       // b(Q)
  double t_max = 0.0;        // 1 / ||chi_Q||_{L^p_w}
  bool crossing_found = false;
  bool modular_strictly_below_one = true;  // int (t_Q w)^p < 1
  double equality_residual = 0.0;          // relative defect of the G = 1 crossing
};
CriticalScale critical_scale(const Cube& q, const SpaceSpec& space, const LemmaConstants& cst);

// Budget checks over disjoint families: sum_Q b(Q) <= 2k, plus the sampled
// two-sided inequality r-mean <= k modular + b(Q) for admissible t.
ProbeReport scale_budget_check(const SpaceSpec& space, const LemmaConstants& cst,
                               const std::vector<std::vector<Cube>>& families,
                               std::size_t eqb_samples, std::uint64_t seed);

// Reverse-Holder ratio of (t w)^p over the norm window
// t in [min(1, 1/||chi_Q||^{1+eps}), max(1, ...)], 32 log-spaced points,
// with the median-exponent diagnostics.
ProbeReport windowed_rh_check(const SpaceSpec& space, const LemmaConstants& cst,
                              const std::vector<Cube>& cubes, int t_points = 32);

// Two-term bound  |Q| (avg (tw)^{gamma p})^{1/gamma}
//                 <= c int (tw)^p + 2 t^eta b(Q) [t<1]
// for all t with t ||chi_Q|| <= 1: reports the minimal c per cube and the
// family budget sum; the t >= 1 branch is cross-checked against the
// windowed reverse-Holder ratios.
ProbeReport budgeted_rh_check(const SpaceSpec& space, const LemmaConstants& cst,
                              const std::vector<Cube>& cubes, int t_points = 32);

// End-to-end duality experiment: operator-norm lower bounds on the space
// and its associate across resolutions, the sparse-embedding probe, and the
// normalized modular-sum form; emits a stability verdict.
struct DualityOptions {
  std::vector<int> resolutions = {6, 8, 10, 12};
  int probe_resolution = 8;
  double stability_threshold = 1.5;
  CandidateFamily candidates;
  SparseEmbeddingOptions embedding;
  std::size_t suff_trials = 12;
  std::uint64_t seed = 7;
};

// space_at(m) must build the same space preset at resolution m.
ProbeReport duality_experiment(const std::function<SpaceSpec(int)>& space_at,
                               const DualityOptions& opt);

}  // namespace maxdual
