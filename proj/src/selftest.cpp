#include "maxdual/selftest.hpp"

#include <cmath>

#include "maxdual/czsparse.hpp"
#include "maxdual/duallab.hpp"
#include "maxdual/presets.hpp"
#include "maxdual/rng.hpp"
#include "maxdual/weights.hpp"

namespace maxdual {

namespace {

LatticeFunction random_support_fn(int n, int m, Rng& rng, double amp = 1.0) {
  LatticeFunction f(n, m, 0.0, true);
  Box supp = support_box(n);
  std::int64_t s0 = (supp.lo[0] - f.box().lo[0]) / f.cell_side();
  std::int64_t count = supp.len[0] / f.cell_side();
  std::int64_t ny = n == 2 ? f.cells_per_axis() : 1;
  for (std::int64_t iy = 0; iy < ny; ++iy)
    for (std::int64_t ix = 0; ix < f.cells_per_axis(); ++ix) {
      bool in = ix >= s0 && ix < s0 + count;
      if (n == 2) in = in && iy >= s0 && iy < s0 + count;
      if (in) f.set(ix, iy, amp * rng.uniform());
    }
  return f;
}

ProbeReport grid_axiom_check(int n, int m_small) {
  ProbeReport rep;
  rep.id = "grid_axioms";
  Box box = computational_box(n);
  std::size_t partition_fail = 0, nesting_fail = 0, identity_fail = 0;
  for (const auto& g : build_shifted_grids(n)) {
    for (int level = -2; level <= m_small; ++level) {
      // Partition: cubes at one level tile the box exactly.
      double covered = 0.0;
      std::int64_t jx0 = grid_locate(g, 0, level, box.lo[0]);
      std::int64_t jx1 = grid_locate(g, 0, level, box.hi(0) - 1);
      std::int64_t jy0 = 0, jy1 = 0;
      if (n == 2) {
        jy0 = grid_locate(g, 1, level, box.lo[1]);
        jy1 = grid_locate(g, 1, level, box.hi(1) - 1);
      }
      for (std::int64_t jy = jy0; jy <= jy1; ++jy)
        for (std::int64_t jx = jx0; jx <= jx1; ++jx) {
          Cube c = realize(GridCube{g, level, {jx, jy}});
          covered += intersect(c.box(), box).volume_units();
          if (level > -2) {
            GridCube gc{g, level, {jx, jy}};
            GridCube par = parent(gc);
            if (!realize(par).contains(c)) nesting_fail++;
            bool found = false;
            for (const GridCube& ch : children(par))
              if (ch.idx == gc.idx) found = true;
            if (!found) identity_fail++;
          }
        }
      if (std::fabs(covered - box.volume_units()) > 1e-9) partition_fail++;
    }
  }
  rep.data["partition_failures"] = partition_fail;
  rep.data["nesting_failures"] = nesting_fail;
  rep.data["identity_failures"] = identity_fail;
  if (partition_fail || nesting_fail || identity_fail) rep.fail("grid axiom violated");
  return rep;
}

ProbeReport cover_check(int n, std::size_t trials, std::uint64_t seed) {
  ProbeReport rep;
  rep.id = "cover_cube";
  Rng rng(seed);
  Box box = computational_box(n);
  const Tick quantum = kTickDen >> 16;
  std::int64_t span = box.len[0] / quantum;
  double worst_ratio = 0.0;
  std::size_t failures = 0;
  double bound = n == 2 ? 36.0 : 6.0;
  for (std::size_t t = 0; t < trials; ++t) {
    Cube q;
    q.n = n;
    std::int64_t len = 1 + static_cast<std::int64_t>(rng.below(static_cast<std::uint64_t>(span)));
    q.side = len * quantum;
    for (int a = 0; a < n; ++a)
      q.lo[a] = box.lo[a] +
                static_cast<std::int64_t>(rng.below(static_cast<std::uint64_t>(span - len + 1))) * quantum;
    CoverResult cov = cover_cube(q);
    if (!cov.cube.contains(q)) ++failures;
    double ratio = cov.cube.volume_units() / q.volume_units();
    worst_ratio = std::max(worst_ratio, ratio);
    if (ratio > bound * (1 + 1e-12)) ++failures;
  }
  rep.data["trials"] = trials;
  rep.data["worst_volume_ratio"] = worst_ratio;
  rep.data["bound"] = bound;
  rep.data["failures"] = failures;
  if (failures) rep.fail("covering cube missing or oversized");
  return rep;
}

ProbeReport norm_chain_check(int n, int m, std::size_t trials, std::uint64_t seed) {
  ProbeReport rep;
  rep.id = "modular_norm_chains";
  Rng rng(seed);
  std::size_t big = 0, small = 0, violations = 0;
  for (std::size_t t = 0; t < trials; ++t) {
    double a = 1.2 + 3.0 * rng.uniform();
    double b = rng.uniform() * (4.0 - a);
    ExponentField p = exponent_preset("affine:" + std::to_string(a) + "," + std::to_string(b), n, m);
    double amp = std::exp(rng.uniform(-2.3, 2.3));
    LatticeFunction f = random_support_fn(n, m, rng, amp);
    ProbeReport sub = check_modular_norm_bounds(f, p);
    if (!sub.pass) ++violations;
    if (sub.data["branch"] == "norm>1") ++big;
    if (sub.data["branch"] == "norm<=1") ++small;
  }
  rep.data["trials"] = trials;
  rep.data["branch_above_one"] = big;
  rep.data["branch_at_most_one"] = small;
  rep.data["violations"] = violations;
  if (violations) rep.fail("modular-norm chain violated");
  return rep;
}

ProbeReport comparison_check(int n, int m, std::size_t trials, std::uint64_t seed) {
  ProbeReport rep;
  rep.id = "maximal_grid_comparison";
  Rng rng(seed);
  std::size_t violations = 0;
  double worst = -1e300;
  for (std::size_t t = 0; t < trials; ++t) {
    LatticeFunction f = random_support_fn(n, m, rng);
    ProbeReport sub = check_grid_comparison(f);
    if (!sub.pass) ++violations;
    worst = std::max(worst, sub.data["worst_violation"].get<double>());
  }
  rep.data["trials"] = trials;
  rep.data["violations"] = violations;
  rep.data["worst_violation"] = worst;
  if (violations) rep.fail("grid comparison violated");
  return rep;
}

ProbeReport cz_check(int n, int m, std::size_t trials, double gamma, std::uint64_t seed) {
  ProbeReport rep;
  rep.id = "cz_shrinkage_suite";
  Rng rng(seed);
  auto grids = build_shifted_grids(n);
  std::size_t violations = 0;
  for (std::size_t t = 0; t < trials; ++t) {
    LatticeFunction f = random_support_fn(n, m, rng);
    const ShiftedGrid& g = grids[rng.below(grids.size())];
    CZDecomposition cz = cz_decompose(f, g, gamma);
    ProbeReport sub = check_level_shrinkage(cz, 6);
    if (!sub.pass) ++violations;
  }
  rep.data["trials"] = trials;
  rep.data["gamma"] = gamma;
  rep.data["violations"] = violations;
  if (violations) rep.fail("level shrinkage violated");
  return rep;
}

ProbeReport sparse_check(int n, int m, std::size_t trials, double eta, std::uint64_t seed) {
  ProbeReport rep;
  rep.id = "sparse_suite";
  Rng rng(seed);
  auto grids = build_shifted_grids(n);
  std::size_t cert_fail = 0, geom_fail = 0;
  for (std::size_t t = 0; t < trials; ++t) {
    LatticeFunction f = random_support_fn(n, m, rng);
    const ShiftedGrid& g = grids[rng.below(grids.size())];
    SparseResult sr = sparse_from_maximal(f, g, eta);
    if (!sr.certificate.pass) ++cert_fail;
    if (!verify_sparse_family(sr.family).pass) ++geom_fail;
  }
  rep.data["trials"] = trials;
  rep.data["eta"] = eta;
  rep.data["certificate_failures"] = cert_fail;
  rep.data["geometry_failures"] = geom_fail;
  if (cert_fail || geom_fail) rep.fail("sparse family invariant violated");
  return rep;
}

ProbeReport adjoint_check(int n, int m, std::size_t trials, std::uint64_t seed) {
  ProbeReport rep;
  rep.id = "adjoint_duality";
  Rng rng(seed);
  auto grids = build_shifted_grids(n);
  double worst = 0.0;
  for (std::size_t t = 0; t < trials; ++t) {
    LatticeFunction gen = random_support_fn(n, m, rng);
    const ShiftedGrid& g = grids[rng.below(grids.size())];
    SparseResult sr = sparse_from_maximal(gen, g, 0.5);
    LatticeFunction f = random_support_fn(n, m, rng);
    LatticeFunction gg = random_support_fn(n, m, rng);
    double lhs = pairing_with_sparse(sr.family, f, gg);
    double rhs = pairing_with_adjoint(sr.family, f, gg);
    double scale = std::max(1.0, std::max(std::fabs(lhs), std::fabs(rhs)));
    worst = std::max(worst, std::fabs(lhs - rhs) / scale);
  }
  rep.data["trials"] = trials;
  rep.data["worst_relative_residual"] = worst;
  if (worst > 1e-10) rep.fail("adjoint pairing residual above 1e-10");
  return rep;
}

ProbeReport weights_check(int n, int m, std::uint64_t seed) {
  ProbeReport rep;
  rep.id = "weights_suite";
  WeightField one = weight_preset("const:1", n, m);
  CubeFamily F = all_lattice_aligned(n, std::min(m, n == 1 ? 7 : 4));
  double ap1 = ap_constant(one, 2.0, F);
  WeightField v = weight_preset("power-weight:0.5", n, m);
  ProbeReport rh = reverse_holder_probe(v, F, {1.0, 1.25, 1.5, 2.0, 3.0});
  ProbeReport conv = converse_volume_check(v, 2.0, F, seed, 1000);
  double c1 = rh.csv_rows.front()[1];
  rep.data["ap_constant_of_one"] = ap1;
  rep.data["rh_c_at_1"] = c1;
  rep.data["rh_monotone"] = rh.data["monotone"];
  rep.data["converse_violations"] = conv.data["violations"];
  if (ap1 != 1.0) rep.fail("ap constant of the unit weight is not exactly 1");
  if (std::fabs(c1 - 1.0) > 1e-12) rep.fail("reverse Holder curve c(1) != 1");
  if (!rh.pass || !conv.pass) rep.fail("weight probe failed");
  return rep;
}

ProbeReport rdf_check(int n, int m, std::size_t trials, std::uint64_t seed) {
  ProbeReport rep;
  rep.id = "rdf_majorant";
  Rng rng(seed);
  MaximalKind kind = MaximalKind::grid_kind(build_shifted_grids(n)[0]);
  ExponentField p2 = exponent_preset("const:2", n, m);
  const double A = 2.0;  // certified constant-exponent bound for the grid kind
  std::size_t violations = 0;
  for (std::size_t t = 0; t < trials; ++t) {
    LatticeFunction g = random_support_fn(n, m, rng);
    RdfResult r = rubio_de_francia(g, kind, A, 12);
    for (std::size_t i = 0; i < g.size(); ++i)
      if (r.majorant[i] + 1e-12 < g[i]) ++violations;
    double ng = std::sqrt(modular(g, p2));
    double nr = std::sqrt(modular(r.majorant, p2));
    if (nr > 2.0 * ng * (1 + 1e-9)) ++violations;
    LatticeFunction mr = maximal(r.majorant, kind);
    for (std::size_t i = 0; i < g.size(); ++i)
      if (mr[i] > 2.0 * A * r.majorant[i] + r.tail[i] + 1e-9) ++violations;
  }
  rep.data["trials"] = trials;
  rep.data["violations"] = violations;
  if (violations) rep.fail("majorant property violated");
  return rep;
}

ProbeReport embedding_calibration(int n, int m, std::uint64_t seed) {
  ProbeReport rep;
  rep.id = "embedding_calibration";
  SpaceSpec space = named_space("calibration", n, m);
  SparseEmbeddingOptions opt;
  opt.trials = 9;
  opt.seed = seed;
  opt.shape = SparseEmbeddingOptions::Shape::SingleCube;
  ProbeReport sub = sparse_embedding_probe(space, opt);
  double delta = sub.data["fitted_delta"].get<double>();
  rep.data["fitted_delta"] = delta;
  rep.data["expected"] = 0.5;
  if (std::fabs(delta - 0.5) > 0.02) rep.fail("calibration exponent off by more than 0.02");
  return rep;
}

}  // namespace

std::vector<ProbeReport> run_selftest(const ExperimentConfig& cfg) {
  std::vector<ProbeReport> out;
  int n = cfg.n, m = cfg.m;
  std::uint64_t seed = cfg.seed;
  out.push_back(grid_axiom_check(n, std::min(m, 5)));
  out.push_back(cover_check(n, 1000, seed + 1));
  out.push_back(norm_chain_check(n, m, 200, seed + 2));
  out.push_back(comparison_check(n, std::min(m, n == 1 ? 8 : 4), 10, seed + 3));
  out.push_back(cz_check(n, m, 10, 2.0, seed + 4));
  out.push_back(sparse_check(n, m, 10, 0.5, seed + 5));
  out.push_back(adjoint_check(n, m, 50, seed + 6));
  out.push_back(weights_check(n, m, seed + 7));
  out.push_back(rdf_check(n, m, 10, seed + 8));
  out.push_back(embedding_calibration(n, m, seed + 9));
  return out;
}

}  // namespace maxdual
