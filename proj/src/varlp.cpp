#include "maxdual/varlp.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>

#include "maxdual/rng.hpp"

namespace maxdual {

ExponentField::ExponentField(LatticeFunction p) : p_(std::move(p)) {
  p_.validate();
  pmin_ = p_[0];
  pmax_ = p_[0];
  for (std::size_t i = 0; i < p_.size(); ++i) {
    pmin_ = std::min(pmin_, p_[i]);
    pmax_ = std::max(pmax_, p_[i]);
  }
  if (!(pmin_ > 1.0 + 1e-9)) throw std::invalid_argument("exponent field requires p_- > 1");
  if (!(pmax_ < 1e3)) throw std::invalid_argument("exponent field requires p_+ < 1e3");
}

std::pair<double, double> ExponentField::range_over(const Box& region) const {
  const LatticeFunction& p = p_;
  Box clip = intersect(region, p.box());
  if (clip.empty()) throw std::invalid_argument("exponent range over empty region");
  std::int64_t ix0 = (clip.lo[0] - p.box().lo[0]) / p.cell_side();
  std::int64_t ix1 = (clip.hi(0) - 1 - p.box().lo[0]) / p.cell_side();
  std::int64_t iy0 = 0, iy1 = 0;
  if (p.dim() == 2) {
    iy0 = (clip.lo[1] - p.box().lo[1]) / p.cell_side();
    iy1 = (clip.hi(1) - 1 - p.box().lo[1]) / p.cell_side();
  }
  double lo = p.at(ix0, iy0), hi = lo;
  for (std::int64_t iy = iy0; iy <= iy1; ++iy)
    for (std::int64_t ix = ix0; ix <= ix1; ++ix) {
      lo = std::min(lo, p.at(ix, iy));
      hi = std::max(hi, p.at(ix, iy));
    }
  return {lo, hi};
}

ExponentField conjugate(const ExponentField& p) {
  LatticeFunction q(p.values().dim(), p.values().resolution());
  for (std::size_t i = 0; i < q.size(); ++i) {
    double v = p.values()[i];
    q[i] = v / (v - 1.0);
  }
  return ExponentField(std::move(q));
}

WeightField::WeightField(LatticeFunction w) : w_(std::move(w)) {
  for (std::size_t i = 0; i < w_.size(); ++i) {
    if (!(std::isfinite(w_[i]) && w_[i] > 0))
      throw std::invalid_argument("weight must be strictly positive and finite");
  }
}

WeightField WeightField::inverse() const {
  LatticeFunction v(w_.dim(), w_.resolution());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = 1.0 / w_[i];
  return WeightField(std::move(v));
}

LatticeFunction WeightField::power(const ExponentField& q, double scale) const {
  LatticeFunction v(w_.dim(), w_.resolution(), 0.0, true);
  for (std::size_t i = 0; i < v.size(); ++i) {
    double y = std::pow(scale * w_[i], q.values()[i]);
    if (!std::isfinite(y)) throw std::invalid_argument("non-finite derived weight power");
    v[i] = y;
  }
  return v;
}

double modular_eval(const ModularAtoms& atoms, double lambda) {
  double acc = 0.0;
  for (std::size_t i = 0; i < atoms.size(); ++i) {
    double y = std::fabs(atoms.val[i] * atoms.w[i]) / lambda;
    if (y != 0.0) acc += atoms.vol[i] * std::pow(y, atoms.p[i]);
  }
  return acc;
}

double luxemburg_solve(const ModularAtoms& atoms, double rel_tol, int max_iter) {
  double pmin = 0, pmax = 0;
  bool any = false;
  for (std::size_t i = 0; i < atoms.size(); ++i) {
    if (atoms.val[i] * atoms.w[i] == 0.0 || atoms.vol[i] == 0.0) continue;
    if (!any) {
      pmin = pmax = atoms.p[i];
      any = true;
    } else {
      pmin = std::min(pmin, atoms.p[i]);
      pmax = std::max(pmax, atoms.p[i]);
    }
  }
  if (!any) return 0.0;

  double rho = modular_eval(atoms, 1.0);
  if (!std::isfinite(rho)) throw std::runtime_error("non-finite modular at initial bracket");
  if (rho == 0.0) return 0.0;

  // Modular-norm bracket: rho^{1/p_+} and rho^{1/p_-} enclose the norm on
  // the side determined by whether rho exceeds 1.
  double lo, hi;
  if (rho > 1.0) {
    lo = std::pow(rho, 1.0 / pmax);
    hi = std::pow(rho, 1.0 / pmin);
  } else if (rho < 1.0) {
    lo = std::pow(rho, 1.0 / pmin);
    hi = std::pow(rho, 1.0 / pmax);
  } else {
    return 1.0;
  }
  if (lo > hi) std::swap(lo, hi);
  if (hi <= lo * (1.0 + rel_tol)) return hi;

  // modular(lambda) is strictly decreasing; keep modular(lo) >= 1 >= modular(hi).
  for (int it = 0; it < max_iter && hi - lo > rel_tol * hi; ++it) {
    double mid = 0.5 * (lo + hi);
    if (modular_eval(atoms, mid) >= 1.0)
      lo = mid;
    else
      hi = mid;
  }
  return 0.5 * (lo + hi);
}

namespace {

struct CellRange {
  std::int64_t ix0 = 0, ix1 = -1, iy0 = 0, iy1 = -1;
};

CellRange cells_in(const LatticeFunction& f, const Box& clip) {
  CellRange r;
  if (clip.empty()) return r;
  r.ix0 = (clip.lo[0] - f.box().lo[0]) / f.cell_side();
  r.ix1 = (clip.hi(0) - 1 - f.box().lo[0]) / f.cell_side();
  if (f.dim() == 2) {
    r.iy0 = (clip.lo[1] - f.box().lo[1]) / f.cell_side();
    r.iy1 = (clip.hi(1) - 1 - f.box().lo[1]) / f.cell_side();
  } else {
    r.iy0 = 0;
    r.iy1 = 0;
  }
  return r;
}

double overlap_1d(Tick cell_lo, Tick cell_side, Tick lo, Tick hi) {
  Tick a = std::max(cell_lo, lo);
  Tick b = std::min(cell_lo + cell_side, hi);
  return b > a ? tick_to_unit(b - a) : 0.0;
}

}  // namespace

ModularAtoms atoms_of(const LatticeFunction& f, const ExponentField& p,
                      const WeightField* w, const Box* region) {
  if (p.values().dim() != f.dim() || p.values().resolution() != f.resolution())
    throw std::invalid_argument("exponent lattice mismatch");
  ModularAtoms atoms;
  Box clip = region ? intersect(*region, f.box()) : f.box();
  CellRange r = cells_in(f, clip);
  for (std::int64_t iy = r.iy0; iy <= r.iy1; ++iy) {
    for (std::int64_t ix = r.ix0; ix <= r.ix1; ++ix) {
      auto corner = f.cell_corner(ix, iy);
      double vol = overlap_1d(corner[0], f.cell_side(), clip.lo[0], clip.hi(0));
      if (f.dim() == 2)
        vol *= overlap_1d(corner[1], f.cell_side(), clip.lo[1], clip.hi(1));
      std::size_t flat = f.flat_index(ix, iy);
      atoms.push(vol, f[flat], w ? w->at_flat(flat) : 1.0, p.at_flat(flat));
    }
  }
  return atoms;
}

double modular(const LatticeFunction& f, const ExponentField& p, const std::optional<Box>& region) {
  const Box* rp = region ? &*region : nullptr;
  ModularAtoms atoms = atoms_of(f, p, nullptr, rp);
  return modular_eval(atoms, 1.0);
}

double luxemburg_norm(const LatticeFunction& f, const ExponentField& p) {
  return luxemburg_solve(atoms_of(f, p));
}

double weighted_norm(const LatticeFunction& f, const ExponentField& p, const WeightField& w) {
  return luxemburg_solve(atoms_of(f, p, &w));
}

double indicator_norm(const Box& region, const ExponentField& p, const WeightField& w) {
  LatticeFunction one(p.dim(), p.resolution(), 1.0, true);
  ModularAtoms atoms = atoms_of(one, p, &w, &region);
  return luxemburg_solve(atoms);
}

namespace {

// Coordinate cuts of a set of regions merged with the lattice lines they
// straddle; produces the elementary intervals of the overlay per axis.
std::vector<Tick> axis_cuts(const std::vector<const Box*>& regions, int axis,
                            const LatticeFunction& grid) {
  std::set<Tick> cuts;
  for (const Box* b : regions) {
    cuts.insert(std::max(b->lo[axis], grid.box().lo[axis]));
    cuts.insert(std::min(b->hi(axis), grid.box().hi(axis)));
  }
  if (cuts.empty()) return {};
  Tick lo = *cuts.begin(), hi = *cuts.rbegin();
  // lattice lines inside [lo, hi]
  Tick cell = grid.cell_side();
  Tick first = grid.box().lo[axis] + ((lo - grid.box().lo[axis]) / cell) * cell;
  for (Tick t = first; t <= hi; t += cell)
    if (t >= lo) cuts.insert(t);
  return std::vector<Tick>(cuts.begin(), cuts.end());
}

}  // namespace

ModularAtoms atoms_of(const StackedIndicator& s, const ExponentField& p, const WeightField& w) {
  const LatticeFunction& grid = p.values();
  std::vector<const Box*> all;
  for (const auto& piece : s.pieces)
    for (const auto& r : piece.regions) all.push_back(&r);
  ModularAtoms atoms;
  if (all.empty()) return atoms;

  std::vector<Tick> xs = axis_cuts(all, 0, grid);
  std::vector<Tick> ys =
      s.n == 2 ? axis_cuts(all, 1, grid) : std::vector<Tick>{0, 1};
  if (xs.size() < 2 || ys.size() < 2) return atoms;

  for (std::size_t jy = 0; jy + 1 < ys.size(); ++jy) {
    for (std::size_t jx = 0; jx + 1 < xs.size(); ++jx) {
      std::array<Tick, 2> mid{(xs[jx] + xs[jx + 1]) / 2, s.n == 2 ? (ys[jy] + ys[jy + 1]) / 2 : 0};
      double value = 0.0;
      for (const auto& piece : s.pieces) {
        for (const auto& r : piece.regions) {
          bool inside = mid[0] >= r.lo[0] && mid[0] < r.hi(0);
          if (s.n == 2) inside = inside && mid[1] >= r.lo[1] && mid[1] < r.hi(1);
          if (inside) {
            value += piece.coef;
            break;  // regions within a piece are disjoint
          }
        }
      }
      if (value == 0.0) continue;
      std::int64_t ix, iy;
      if (!grid.locate(mid, ix, iy)) continue;  // outside the box: f = 0 there anyway
      double vol = tick_to_unit(xs[jx + 1] - xs[jx]);
      if (s.n == 2) vol *= tick_to_unit(ys[jy + 1] - ys[jy]);
      std::size_t flat = grid.flat_index(ix, iy);
      atoms.push(vol, value, w.at_flat(flat), p.at_flat(flat));
    }
  }
  return atoms;
}

double stacked_norm(const StackedIndicator& s, const ExponentField& p, const WeightField& w) {
  return luxemburg_solve(atoms_of(s, p, w));
}

double stacked_modular(const StackedIndicator& s, const ExponentField& p, const WeightField& w) {
  return modular_eval(atoms_of(s, p, w), 1.0);
}

ProbeReport check_modular_norm_bounds(const LatticeFunction& f, const ExponentField& p,
                                      const std::optional<Box>& region) {
  ProbeReport rep;
  rep.id = "modular_norm_bounds";
  double pmin = p.pminus(), pmax = p.pplus();
  if (region) {
    auto pr = p.range_over(*region);
    pmin = pr.first;
    pmax = pr.second;
  }
  const Box* rp = region ? &*region : nullptr;
  ModularAtoms atoms = atoms_of(f, p, nullptr, rp);
  double rho = modular_eval(atoms, 1.0);
  double norm = luxemburg_solve(atoms);
  rep.data["rho"] = rho;
  rep.data["norm"] = norm;
  rep.data["p_minus"] = pmin;
  rep.data["p_plus"] = pmax;
  if (norm == 0.0) {
    rep.data["branch"] = "zero";
    return rep;
  }
  const double tol = 1e-9;
  double lo, hi;
  const char* branch;
  if (norm > 1.0) {
    lo = std::pow(rho, 1.0 / pmax);
    hi = std::pow(rho, 1.0 / pmin);
    branch = "norm>1";
  } else {
    lo = std::pow(rho, 1.0 / pmin);
    hi = std::pow(rho, 1.0 / pmax);
    branch = "norm<=1";
  }
  rep.data["branch"] = branch;
  rep.data["lower"] = lo;
  rep.data["upper"] = hi;
  rep.data["slack_lower"] = norm - lo;
  rep.data["slack_upper"] = hi - norm;
  if (norm < lo * (1.0 - tol) || norm > hi * (1.0 + tol))
    rep.fail("modular-norm chain violated");
  return rep;
}

ProbeReport holder_pairing_check(const LatticeFunction& f, const LatticeFunction& g,
                                 const ExponentField& p, const WeightField& w) {
  ProbeReport rep;
  rep.id = "holder_pairing";
  LatticeFunction prod = f.abs().cellwise_product(g.abs());
  double lhs = integrate(prod, f.box());
  double nf = weighted_norm(f, p, w);
  double ng = weighted_norm(g, conjugate(p), w.inverse());
  rep.data["pairing"] = lhs;
  rep.data["norm_f"] = nf;
  rep.data["norm_g_conjugate"] = ng;
  double bound = 2.0 * nf * ng;
  double ratio = (nf > 0 && ng > 0) ? lhs / (nf * ng) : 0.0;
  rep.data["ratio"] = ratio;
  rep.data["bound_factor"] = 2.0;
  if (lhs > bound * (1.0 + 1e-9)) rep.fail("pairing exceeds 2 ||f|| ||g||");
  return rep;
}

ProbeReport log_holder_check(const ExponentField& p, double p_inf,
                             std::optional<double> candidate_c,
                             std::uint64_t seed, std::size_t max_pairs) {
  ProbeReport rep;
  rep.id = "log_holder";
  const LatticeFunction& pf = p.values();
  std::int64_t cells = pf.cells_per_axis();
  std::int64_t ny = pf.dim() == 2 ? cells : 1;
  std::size_t total = static_cast<std::size_t>(cells) * static_cast<std::size_t>(ny);

  double c_local = 0.0, c_decay = 0.0;
  auto dist = [&](std::int64_t ax, std::int64_t ay, std::int64_t bx, std::int64_t by) {
    auto pa = pf.cell_center_units(ax, ay);
    auto pb = pf.cell_center_units(bx, by);
    double dx = pa[0] - pb[0], dy = pa[1] - pb[1];
    return std::sqrt(dx * dx + dy * dy);
  };

  std::size_t all_pairs = total * (total - 1) / 2;
  Rng rng(seed);
  std::size_t pairs = std::min(all_pairs, max_pairs);
  bool exhaustive = all_pairs <= max_pairs;
  std::size_t done = 0;
  if (exhaustive) {
    for (std::size_t i = 0; i < total; ++i)
      for (std::size_t j = i + 1; j < total; ++j) {
        std::int64_t ax = static_cast<std::int64_t>(i) % cells, ay = static_cast<std::int64_t>(i) / cells;
        std::int64_t bx = static_cast<std::int64_t>(j) % cells, by = static_cast<std::int64_t>(j) / cells;
        double d = dist(ax, ay, bx, by);
        double c = std::fabs(pf[i] - pf[j]) * std::log(std::exp(1.0) + 1.0 / d);
        c_local = std::max(c_local, c);
        ++done;
      }
  } else {
    for (std::size_t k = 0; k < pairs; ++k) {
      std::size_t i = rng.below(total), j = rng.below(total);
      if (i == j) continue;
      std::int64_t ax = static_cast<std::int64_t>(i) % cells, ay = static_cast<std::int64_t>(i) / cells;
      std::int64_t bx = static_cast<std::int64_t>(j) % cells, by = static_cast<std::int64_t>(j) / cells;
      double d = dist(ax, ay, bx, by);
      double c = std::fabs(pf[i] - pf[j]) * std::log(std::exp(1.0) + 1.0 / d);
      c_local = std::max(c_local, c);
      ++done;
    }
  }
  for (std::size_t i = 0; i < total; ++i) {
    std::int64_t ax = static_cast<std::int64_t>(i) % cells, ay = static_cast<std::int64_t>(i) / cells;
    auto pt = pf.cell_center_units(ax, ay);
    double r = std::sqrt(pt[0] * pt[0] + pt[1] * pt[1]);
    double c = std::fabs(pf[i] - p_inf) * std::log(std::exp(1.0) + r);
    c_decay = std::max(c_decay, c);
  }
  rep.data["c_local"] = c_local;
  rep.data["c_decay"] = c_decay;
  rep.data["c"] = std::max(c_local, c_decay);
  rep.data["p_inf"] = p_inf;
  rep.data["pairs_checked"] = done;
  rep.data["exhaustive"] = exhaustive;
  rep.data["resolution"] = pf.resolution();
  if (candidate_c) {
    rep.data["candidate_c"] = *candidate_c;
    rep.data["candidate_admissible"] = *candidate_c >= std::max(c_local, c_decay) - 1e-12;
  }
  return rep;
}

}  // namespace maxdual
