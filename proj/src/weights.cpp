#include "maxdual/weights.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "maxdual/rng.hpp"

namespace maxdual {

std::uint64_t CubeFamily::hash() const {
  std::uint64_t h = kFnvBasis;
  h = fnv1a(h, name.data(), name.size());
  for (const auto& c : cubes) {
    h = fnv1a(h, c.lo.data(), sizeof c.lo);
    h = fnv1a(h, &c.side, sizeof c.side);
  }
  return h;
}

CubeFamily all_lattice_aligned(int n, int mprime) {
  CubeFamily F;
  F.name = "all_lattice_aligned(m=" + std::to_string(mprime) + ")";
  LatticeFunction proto(n, mprime);
  std::int64_t N = proto.cells_per_axis();
  Tick cell = proto.cell_side();
  const Box b = proto.box();
  for (std::int64_t t = 1; t <= N; ++t) {
    for (std::int64_t sx = 0; sx + t <= N; ++sx) {
      if (n == 1) {
        F.cubes.push_back(Cube{1, {b.lo[0] + sx * cell, 0}, t * cell});
      } else {
        for (std::int64_t sy = 0; sy + t <= N; ++sy)
          F.cubes.push_back(Cube{2, {b.lo[0] + sx * cell, b.lo[1] + sy * cell}, t * cell});
      }
    }
  }
  return F;
}

CubeFamily grid_cubes(const ShiftedGrid& g, int m, int level_min) {
  CubeFamily F;
  F.name = "grid_cubes(" + g.label() + ")";
  Box box = computational_box(g.n);
  for (int level = level_min; level <= m; ++level) {
    std::int64_t jx0 = grid_locate(g, 0, level, box.lo[0]);
    std::int64_t jx1 = grid_locate(g, 0, level, box.hi(0) - 1);
    std::int64_t jy0 = 0, jy1 = 0;
    if (g.n == 2) {
      jy0 = grid_locate(g, 1, level, box.lo[1]);
      jy1 = grid_locate(g, 1, level, box.hi(1) - 1);
    }
    for (std::int64_t jy = jy0; jy <= jy1; ++jy)
      for (std::int64_t jx = jx0; jx <= jx1; ++jx) {
        Cube c = realize(GridCube{g, level, {jx, jy}});
        if (box_contains(box, c.box())) F.cubes.push_back(c);
      }
  }
  return F;
}

CubeFamily random_cubes(int n, std::uint64_t seed, std::size_t count) {
  CubeFamily F;
  F.name = "random_cubes(seed=" + std::to_string(seed) + ")";
  Rng rng(seed);
  Box box = computational_box(n);
  // Tick-aligned on a fine sub-lattice so all geometry stays exact.
  const Tick quantum = kTickDen >> 20;
  const std::int64_t span = box.len[0] / quantum;
  while (F.cubes.size() < count) {
    std::int64_t len = 1 + static_cast<std::int64_t>(rng.below(static_cast<std::uint64_t>(span)));
    Cube c;
    c.n = n;
    c.side = len * quantum;
    bool ok = true;
    for (int a = 0; a < n; ++a) {
      std::int64_t room = span - len;
      if (room < 0) { ok = false; break; }
      c.lo[a] = box.lo[a] + static_cast<std::int64_t>(rng.below(static_cast<std::uint64_t>(room + 1))) * quantum;
    }
    if (ok) F.cubes.push_back(c);
  }
  return F;
}

CubeFamily support_blocks(int n, int m, int max_depth) {
  CubeFamily F;
  F.name = "support_blocks(depth=" + std::to_string(max_depth) + ")";
  Box supp = support_box(n);
  for (int d = 0; d <= std::min(max_depth, m); ++d) {
    Tick side = kTickDen >> d;
    std::int64_t blocks = std::int64_t(1) << d;
    for (std::int64_t by = 0; by < (n == 2 ? blocks : 1); ++by)
      for (std::int64_t bx = 0; bx < blocks; ++bx)
        F.cubes.push_back(Cube{n, {supp.lo[0] + bx * side, supp.lo[1] + by * side}, side});
  }
  return F;
}

namespace {

// Weighted mean over clipped cells with the same weights in numerator and
// denominator, so the mean of the constant 1 is exactly 1.
double clipped_average(const LatticeFunction& f, const Cube& q) {
  const Box& b = f.box();
  Box clip = intersect(q.box(), b);
  if (clip.empty()) throw std::invalid_argument("average over empty cube");
  Tick cell = f.cell_side();
  std::int64_t ix0 = (clip.lo[0] - b.lo[0]) / cell;
  std::int64_t ix1 = (clip.hi(0) - 1 - b.lo[0]) / cell;
  std::int64_t iy0 = 0, iy1 = 0;
  if (f.dim() == 2) {
    iy0 = (clip.lo[1] - b.lo[1]) / cell;
    iy1 = (clip.hi(1) - 1 - b.lo[1]) / cell;
  }
  double num = 0.0, den = 0.0;
  for (std::int64_t iy = iy0; iy <= iy1; ++iy)
    for (std::int64_t ix = ix0; ix <= ix1; ++ix) {
      auto corner = f.cell_corner(ix, iy);
      double wt = tick_to_unit(std::min(clip.hi(0), corner[0] + cell) - std::max(clip.lo[0], corner[0]));
      if (f.dim() == 2)
        wt *= tick_to_unit(std::min(clip.hi(1), corner[1] + cell) - std::max(clip.lo[1], corner[1]));
      num += f.at(ix, iy) * wt;
      den += wt;
    }
  return num / den;
}

}  // namespace

ApDetail ap_constant_detail(const WeightField& v, double p, const CubeFamily& F) {
  if (!(p > 1.0)) throw std::invalid_argument("ap_constant requires p > 1");
  if (F.cubes.empty()) throw std::invalid_argument("empty cube family");
  const LatticeFunction& w = v.values();
  LatticeFunction winv(w.dim(), w.resolution(), 0.0, true);
  double expo = -1.0 / (p - 1.0);
  for (std::size_t i = 0; i < w.size(); ++i) {
    double y = std::pow(w[i], expo);
    if (!std::isfinite(y)) throw std::invalid_argument("non-finite integrand in ap_constant");
    winv[i] = y;
  }
  ApDetail best;
  for (std::size_t qi = 0; qi < F.cubes.size(); ++qi) {
    const Cube& q = F.cubes[qi];
    double a1 = clipped_average(w, q);
    double a2 = clipped_average(winv, q);
    double val = a1 * std::pow(a2, p - 1.0);
    if (!std::isfinite(val)) throw std::invalid_argument("non-finite product in ap_constant");
    if (val > best.value) {
      best.value = val;
      best.argmax = qi;
    }
  }
  return best;
}

double ap_constant(const WeightField& v, double p, const CubeFamily& F) {
  return ap_constant_detail(v, p, F).value;
}

ProbeReport reverse_holder_probe(const WeightField& v, const CubeFamily& F,
                                 const std::vector<double>& r_grid) {
  ProbeReport rep;
  rep.id = "reverse_holder_curve";
  const LatticeFunction& w = v.values();
  bool overflow = false;
  double prev = 0.0;
  bool monotone = true;
  double worst_c = 0.0;
  std::size_t worst_cube = 0;
  double worst_r = 0.0;
  rep.csv_header = {"r", "c", "argmax_cube"};
  for (double r : r_grid) {
    LatticeFunction wr(w.dim(), w.resolution(), 0.0, true);
    for (std::size_t i = 0; i < w.size(); ++i) wr[i] = std::pow(w[i], r);
    double c = 0.0;
    std::size_t arg = 0;
    for (std::size_t qi = 0; qi < F.cubes.size(); ++qi) {
      const Cube& q = F.cubes[qi];
      double num = std::pow(clipped_average(wr, q), 1.0 / r);
      double den = clipped_average(w, q);
      double ratio = num / den;
      if (!std::isfinite(ratio)) {
        overflow = true;
        continue;
      }
      if (ratio > c) {
        c = ratio;
        arg = qi;
      }
    }
    rep.csv_rows.push_back({r, c, static_cast<double>(arg)});
    if (c > worst_c) {
      worst_c = c;
      worst_cube = arg;
      worst_r = r;
    }
    if (c + 1e-12 < prev) monotone = false;
    prev = c;
  }
  rep.data["family"] = F.name;
  rep.data["family_hash"] = F.hash();
  rep.data["overflow_flagged"] = overflow;
  rep.data["monotone"] = monotone;
  if (!F.cubes.empty()) {
    const Cube& q = F.cubes[worst_cube];
    rep.data["worst_ratio"] = worst_c;
    rep.data["worst_r"] = worst_r;
    rep.data["argmax_cube"] = {{"lo", tick_to_unit(q.lo[0])}, {"side", q.side_units()}};
  }
  if (!monotone) rep.fail("c(r) not nondecreasing");
  return rep;
}

namespace {

Cube random_subcube(Rng& rng, const Cube& q) {
  // Tick-aligned subcube with positive volume.
  Cube e;
  e.n = q.n;
  Tick quantum = std::max<Tick>(1, q.side >> 12);
  std::int64_t span = q.side / quantum;
  std::int64_t len = 1 + static_cast<std::int64_t>(rng.below(static_cast<std::uint64_t>(span)));
  e.side = len * quantum;
  for (int a = 0; a < q.n; ++a) {
    std::int64_t room = span - len;
    e.lo[a] = q.lo[a] + static_cast<std::int64_t>(rng.below(static_cast<std::uint64_t>(room + 1))) * quantum;
  }
  return e;
}

struct FitResult {
  double slope = 0.0, intercept = 0.0, r2 = 0.0;
};

FitResult linear_fit(const std::vector<double>& x, const std::vector<double>& y) {
  FitResult f;
  std::size_t n = x.size();
  if (n < 2) return f;
  double sx = 0, sy = 0, sxx = 0, sxy = 0, syy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    sx += x[i];
    sy += y[i];
    sxx += x[i] * x[i];
    sxy += x[i] * y[i];
    syy += y[i] * y[i];
  }
  double denom = n * sxx - sx * sx;
  if (denom == 0) return f;
  f.slope = (n * sxy - sx * sy) / denom;
  f.intercept = (sy - f.slope * sx) / n;
  double ss_tot = syy - sy * sy / n;
  double ss_res = 0;
  for (std::size_t i = 0; i < n; ++i) {
    double e = y[i] - (f.intercept + f.slope * x[i]);
    ss_res += e * e;
  }
  f.r2 = ss_tot > 0 ? 1.0 - ss_res / ss_tot : 1.0;
  return f;
}

}  // namespace

ProbeReport ainfty_envelope_probe(const WeightField& v, const CubeFamily& F,
                                  std::uint64_t seed, std::size_t samples) {
  ProbeReport rep;
  rep.id = "ainfty_envelope";
  rep.csv_header = {"log_volume_ratio", "log_weight_ratio"};
  const LatticeFunction& w = v.values();
  Rng rng(seed);
  std::vector<double> xs, ys;
  for (std::size_t t = 0; t < samples; ++t) {
    const Cube& q = F.cubes[rng.below(F.cubes.size())];
    Cube e = random_subcube(rng, q);
    double wq = integrate(w, q);
    double we = integrate(w, e);
    if (!(wq > 0) || !(we > 0)) continue;
    double vr = e.volume_units() / q.volume_units();
    double wr = we / wq;
    xs.push_back(std::log(vr));
    ys.push_back(std::log(wr));
    rep.csv_rows.push_back({std::log(vr), std::log(wr)});
  }
  FitResult fit = linear_fit(xs, ys);
  // The envelope form carries an exponent in (0, 1], so the fitted slope is
  // clamped to that range; the raw regression slope stays as a diagnostic.
  double theta = std::min(1.0, std::max(1e-6, fit.slope));
  double log_c_up = -1e300, log_c_lo = 1e300;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    log_c_up = std::max(log_c_up, ys[i] - theta * xs[i]);
    log_c_lo = std::min(log_c_lo, ys[i] - theta * xs[i]);
  }
  rep.data["family"] = F.name;
  rep.data["family_hash"] = F.hash();
  rep.data["seed"] = seed;
  rep.data["samples"] = xs.size();
  rep.data["fitted_exponent"] = theta;
  rep.data["raw_slope"] = fit.slope;
  rep.data["r2"] = fit.r2;
  rep.data["envelope_constant_upper"] = std::exp(log_c_up);
  rep.data["envelope_constant_lower"] = std::exp(log_c_lo);
  rep.data["worst_residual"] = log_c_up - fit.intercept;
  rep.note("fitted values are descriptive, not claims about optimal constants");
  return rep;
}

ProbeReport converse_volume_check(const WeightField& v, double p, const CubeFamily& F,
                                  std::uint64_t seed, std::size_t samples) {
  ProbeReport rep;
  rep.id = "converse_volume_bound";
  double apc = ap_constant(v, p, F);
  const LatticeFunction& w = v.values();
  Rng rng(seed);
  std::size_t violations = 0, checked = 0;
  double worst_margin = 1e300;
  Cube worst_cube{};
  for (std::size_t t = 0; t < samples; ++t) {
    const Cube& q = F.cubes[rng.below(F.cubes.size())];
    Cube e = random_subcube(rng, q);
    double wq = integrate(w, q);
    double we = integrate(w, e);
    if (!(we > 0)) continue;
    double lhs = wq / we;
    double rhs = std::pow(q.volume_units() / e.volume_units(), p) * apc;
    if (rhs - lhs < worst_margin) {
      worst_margin = rhs - lhs;
      worst_cube = q;
    }
    if (lhs > rhs * (1.0 + 1e-9)) ++violations;
    ++checked;
  }
  rep.data["p"] = p;
  rep.data["ap_constant"] = apc;
  rep.data["family"] = F.name;
  rep.data["family_hash"] = F.hash();
  rep.data["seed"] = seed;
  rep.data["checked"] = checked;
  rep.data["violations"] = violations;
  rep.data["worst_margin"] = worst_margin;
  if (checked)
    rep.data["argmax_cube"] = {{"lo", tick_to_unit(worst_cube.lo[0])}, {"side", worst_cube.side_units()}};
  if (violations) rep.fail("converse volume bound violated");
  return rep;
}

RdfResult rubio_de_francia(const LatticeFunction& g, const MaximalKind& kind, double A, int terms) {
  if (!(A > 0)) throw std::invalid_argument("operator norm surrogate must be positive");
  if (terms < 1) throw std::invalid_argument("series needs at least one term");
  for (std::size_t i = 0; i < g.size(); ++i)
    if (g[i] < 0) throw std::invalid_argument("rubio_de_francia requires g >= 0");

  RdfResult res{LatticeFunction(g.dim(), g.resolution(), 0.0, true),
                LatticeFunction(g.dim(), g.resolution(), 0.0, true),
                {}, 0.0, 0.0, false};
  LatticeFunction term = g;
  double denom = 2.0 * A;
  double scale = 1.0;
  for (int k = 0; k < terms; ++k) {
    double sup = 0.0;
    for (std::size_t i = 0; i < term.size(); ++i) {
      res.majorant[i] += scale * term[i];
      sup = std::max(sup, scale * term[i]);
    }
    res.term_sup.push_back(sup);
    term = maximal(term, kind);
    scale /= denom;
  }
  // Exact truncation term: M(Rg) <= 2A Rg + 2A * M^N g/(2A)^N cellwise.
  for (std::size_t i = 0; i < term.size(); ++i) res.tail[i] = denom * scale * term[i];

  std::size_t nterm = res.term_sup.size();
  if (nterm >= 2 && res.term_sup[nterm - 2] > 0) {
    res.ratio = res.term_sup[nterm - 1] / res.term_sup[nterm - 2];
    if (res.ratio < 1.0)
      res.tail_estimate = res.term_sup[nterm - 1] * res.ratio / (1.0 - res.ratio);
    else
      res.diverged = true;
  }
  return res;
}

double a1_ratio(const WeightField& v, const MaximalKind& kind) {
  LatticeFunction mv = maximal(v.values(), kind);
  double best = 0.0;
  for (std::size_t i = 0; i < mv.size(); ++i) best = std::max(best, mv[i] / v.at_flat(i));
  return best;
}

double apvar_constant(const ExponentField& p, const WeightField& w, const CubeFamily& F) {
  if (F.cubes.empty()) throw std::invalid_argument("empty cube family");
  ExponentField pc = conjugate(p);
  WeightField wi = w.inverse();
  double best = 0.0;
  for (const Cube& q : F.cubes) {
    double n1 = indicator_norm(q.box(), p, w);
    double n2 = indicator_norm(q.box(), pc, wi);
    best = std::max(best, n1 * n2 / q.volume_units());
  }
  return best;
}

}  // namespace maxdual
