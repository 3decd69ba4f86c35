#pragma once

#include <optional>
#include <vector>

#include "maxdual/lattice.hpp"
#include "maxdual/report.hpp"

namespace maxdual {

// Variable exponent p(.) on the computational box with 1 < p_- <= p_+ < 1e3.
class ExponentField {
 public:
  explicit ExponentField(LatticeFunction p);

  const LatticeFunction& values() const { return p_; }
  double pminus() const { return pmin_; }
  double pplus() const { return pmax_; }
  double at_flat(std::size_t i) const { return p_[i]; }
  int dim() const { return p_.dim(); }
  int resolution() const { return p_.resolution(); }

  // Extrema over cells meeting a sub-region.
  std::pair<double, double> range_over(const Box& region) const;

 private:
  LatticeFunction p_;
  double pmin_, pmax_;
};

// Pointwise conjugate p'(x) = p(x) / (p(x) - 1).
ExponentField conjugate(const ExponentField& p);

// Strictly positive weight on the computational box.
class WeightField {
 public:
  explicit WeightField(LatticeFunction w);

  const LatticeFunction& values() const { return w_; }
  double at_flat(std::size_t i) const { return w_[i]; }

  WeightField inverse() const;
  // Cellwise w^q for a cellwise exponent; rejects non-finite results.
  LatticeFunction power(const ExponentField& q, double scale = 1.0) const;

 private:
  LatticeFunction w_;
};

// One weighted atom of a piecewise-constant integrand: contributes
// vol * |val * w / lambda|^p to the modular at scale lambda.
struct ModularAtoms {
  std::vector<double> vol, val, w, p;

  void push(double volume, double value, double weight, double exponent) {
    vol.push_back(volume);
    val.push_back(value);
    w.push_back(weight);
    p.push_back(exponent);
  }
  std::size_t size() const { return vol.size(); }
};

double modular_eval(const ModularAtoms& atoms, double lambda);

// Luxemburg norm from atoms: the unique lambda with modular(lambda) = 1,
// bracketed by the modular-norm estimates and refined by bisection.
// Relative tolerance 1e-10, at most 200 iterations; 0 for the zero function.
double luxemburg_solve(const ModularAtoms& atoms, double rel_tol = 1e-10, int max_iter = 200);

// Atoms of f*w over the full box (cells), or clipped to a region.
ModularAtoms atoms_of(const LatticeFunction& f, const ExponentField& p,
                      const WeightField* w = nullptr,
                      const Box* region = nullptr);

// rho(f) = integral of |f|^p over the box (or a sub-region).
double modular(const LatticeFunction& f, const ExponentField& p,
               const std::optional<Box>& region = std::nullopt);

double luxemburg_norm(const LatticeFunction& f, const ExponentField& p);
double weighted_norm(const LatticeFunction& f, const ExponentField& p, const WeightField& w);

// || chi_R ||_{L^p_w} for an arbitrary tick region (exact clipped cells).
double indicator_norm(const Box& region, const ExponentField& p, const WeightField& w);

// A nonnegative linear combination of indicators of tick regions.  Regions
// may overlap (values stack).  Norms are computed on the exact overlay of
// the regions with the lattice.
struct StackedIndicator {
  struct Piece {
    double coef;
    std::vector<Box> regions;  // pairwise disjoint within one piece
  };
  int n = 1;
  std::vector<Piece> pieces;
};

ModularAtoms atoms_of(const StackedIndicator& s, const ExponentField& p, const WeightField& w);
double stacked_norm(const StackedIndicator& s, const ExponentField& p, const WeightField& w);
double stacked_modular(const StackedIndicator& s, const ExponentField& p, const WeightField& w);

// Modular-vs-norm chain check, both branches (norm above / below 1); the
// optional region restricts everything to a sub-box with local exponent
// extrema.
ProbeReport check_modular_norm_bounds(const LatticeFunction& f, const ExponentField& p,
                                      const std::optional<Box>& region = std::nullopt);

// Pairing bound  int |fg| <= 2 ||f||_{L^p_w} ||g||_{L^{p'}_{1/w}}.
ProbeReport holder_pairing_check(const LatticeFunction& f, const LatticeFunction& g,
                                 const ExponentField& p, const WeightField& w);

// Smallest admissible log-continuity constants of p, at lattice resolution:
// |p(x)-p(y)| <= c / log(e + 1/|x-y|) and |p(x)-p_inf| <= c / log(e + |x|).
// A nonnegative candidate constant, when given, is judged against them.
ProbeReport log_holder_check(const ExponentField& p, double p_inf,
                             std::optional<double> candidate_c = std::nullopt,
                             std::uint64_t seed = 7, std::size_t max_pairs = 100000);

}  // namespace maxdual
