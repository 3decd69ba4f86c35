#include "maxdual/czsparse.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <json.hpp>

namespace maxdual {

double CZDecomposition::threshold(int k) const { return std::pow(gamma, k) * base_average; }

const std::vector<CZCube>& CZDecomposition::cubes_at(int k) const {
  static const std::vector<CZCube> kEmpty;
  if (k < k_lo || k > k_hi) return kEmpty;
  return levels[static_cast<std::size_t>(k - k_lo)];
}

std::size_t CZDecomposition::total_cubes() const {
  std::size_t total = 0;
  for (const auto& lv : levels) total += lv.size();
  return total;
}

namespace {

// Maximal cubes with average > thr, top-down over the stored family.
void select_maximal(const GridIntegralTable& table, int level, std::int64_t jx, std::int64_t jy,
                    double thr, std::vector<CZCube>& out) {
  double vol = Cube{table.grid().n, {0, 0}, grid_side(level)}.volume_units();
  double integral = table.integral_of(level, jx, jy);
  if (integral <= 0.0) return;
  double avg = integral / vol;
  GridCube gc{table.grid(), level, {jx, jy}};
  if (avg > thr) {
    out.push_back(CZCube{realize(gc), gc, avg});
    return;
  }
  if (level == table.level_max()) return;
  for (const GridCube& c : children(gc)) select_maximal(table, c.level, c.idx[0], c.idx[1], thr, out);
}

double max_top_average(const GridIntegralTable& table) {
  int top = table.level_min();
  double vol = Cube{table.grid().n, {0, 0}, grid_side(top)}.volume_units();
  double best = 0.0;
  for (std::int64_t jy = table.jy_begin(top); jy < table.jy_end(top); ++jy)
    for (std::int64_t jx = table.jx_begin(top); jx < table.jx_end(top); ++jx)
      best = std::max(best, table.integral_of(top, jx, jy) / vol);
  return best;
}

// Largest integer k with gamma^k < x (strict).
int level_below(double gamma, double x) {
  int k = static_cast<int>(std::floor(std::log(x) / std::log(gamma)));
  while (std::pow(gamma, k) >= x) --k;
  while (std::pow(gamma, k + 1) < x) ++k;
  return k;
}

}  // namespace

CZDecomposition cz_decompose(const LatticeFunction& f, const ShiftedGrid& grid, double gamma) {
  if (!(gamma > 1.0)) throw std::invalid_argument("cz_decompose requires gamma > 1");
  CZDecomposition cz;
  cz.gamma = gamma;
  cz.grid = grid;

  LatticeFunction absf = f.abs();
  auto table = std::make_shared<GridIntegralTable>(absf, grid, kGridMaximalTopLevel);
  cz.table = table;

  LatticeFunction mgrid = grid_maximal_from_table(f, *table);
  double max_m = 0.0, minpos_m = 0.0;
  for (std::size_t i = 0; i < mgrid.size(); ++i) {
    double v = mgrid[i];
    max_m = std::max(max_m, v);
    if (v > 0.0 && (minpos_m == 0.0 || v < minpos_m)) minpos_m = v;
  }
  if (max_m == 0.0) return cz;  // zero function: empty decomposition

  // Thresholds run from just below the smallest positive maximal value up to
  // the largest; the family top is extended until no top cube can ever be
  // selected, so maximality witnesses exist at every enumerated level.
  cz.k_lo = level_below(gamma, minpos_m);
  cz.k_hi = level_below(gamma, max_m);
  while (max_top_average(*table) > std::pow(gamma, cz.k_lo)) {
    if (table->level_min() <= kMinGridLevel)
      throw std::logic_error("cz_decompose: ran out of coarse levels for the top witness");
    table->extend_top(table->level_min() - 1);
  }

  cz.levels.resize(static_cast<std::size_t>(cz.k_hi - cz.k_lo + 1));
  for (int k = cz.k_lo; k <= cz.k_hi; ++k) {
    double thr = cz.threshold(k);
    auto& out = cz.levels[static_cast<std::size_t>(k - cz.k_lo)];
    int top = table->level_min();
    for (std::int64_t jy = table->jy_begin(top); jy < table->jy_end(top); ++jy)
      for (std::int64_t jx = table->jx_begin(top); jx < table->jx_end(top); ++jx)
        select_maximal(*table, top, jx, jy, thr, out);
  }
  return cz;
}

namespace {

double local_max_average(const LatticeFunction& absf, const Cube& cube) {
  double best = integrate(absf, cube) / cube.volume_units();
  if (cube.side / 2 >= absf.cell_side()) {
    Tick half = cube.side / 2;
    int count = absf.dim() == 2 ? 4 : 2;
    for (int bits = 0; bits < count; ++bits) {
      Cube child = cube;
      child.side = half;
      for (int a = 0; a < absf.dim(); ++a)
        if ((bits >> a) & 1) child.lo[a] += half;
      best = std::max(best, local_max_average(absf, child));
    }
  }
  return best;
}

void select_maximal_local(const LatticeFunction& absf, const Cube& cube, double thr,
                          std::vector<CZCube>& out) {
  double avg = integrate(absf, cube) / cube.volume_units();
  if (avg > thr) {
    out.push_back(CZCube{cube, std::nullopt, avg});
    return;
  }
  if (cube.side / 2 < absf.cell_side()) return;
  Tick half = cube.side / 2;
  int count = absf.dim() == 2 ? 4 : 2;
  for (int bits = 0; bits < count; ++bits) {
    Cube child = cube;
    child.side = half;
    for (int a = 0; a < absf.dim(); ++a)
      if ((bits >> a) & 1) child.lo[a] += half;
    select_maximal_local(absf, child, thr, out);
  }
}

}  // namespace

CZDecomposition cz_decompose_local(const LatticeFunction& f, const Cube& q0, double gamma) {
  if (!(gamma > 1.0)) throw std::invalid_argument("cz_decompose requires gamma > 1");
  if (!box_contains(f.box(), q0.box()))
    throw std::invalid_argument("local base cube outside computational box");
  CZDecomposition cz;
  cz.gamma = gamma;
  cz.local = true;
  cz.q0 = q0;

  LatticeFunction absf = f.abs();
  cz.base_average = integrate(absf, q0) / q0.volume_units();
  if (!(cz.base_average > 0.0))
    throw std::invalid_argument("local decomposition requires |f|_{Q0} > 0");

  double max_avg = local_max_average(absf, q0);
  // k >= 1: the base cube itself has relative average 1 <= gamma^k.
  cz.k_lo = 1;
  cz.k_hi = level_below(gamma, max_avg / cz.base_average);
  if (cz.k_hi < cz.k_lo) return cz;

  cz.levels.resize(static_cast<std::size_t>(cz.k_hi - cz.k_lo + 1));
  for (int k = cz.k_lo; k <= cz.k_hi; ++k) {
    // The base cube never qualifies, so start from its halves.
    auto& out = cz.levels[static_cast<std::size_t>(k - cz.k_lo)];
    double thr = cz.threshold(k);
    if (q0.side / 2 >= absf.cell_side()) {
      Tick half = q0.side / 2;
      int count = absf.dim() == 2 ? 4 : 2;
      for (int bits = 0; bits < count; ++bits) {
        Cube child = q0;
        child.side = half;
        for (int a = 0; a < absf.dim(); ++a)
          if ((bits >> a) & 1) child.lo[a] += half;
        select_maximal_local(absf, child, thr, out);
      }
    }
  }
  return cz;
}

ProbeReport check_level_shrinkage(const CZDecomposition& cz, int l_max) {
  ProbeReport rep;
  rep.id = "cz_level_shrinkage";
  int n = cz.local ? cz.q0.n : cz.grid.n;
  double factor = n == 2 ? 4.0 : 2.0;
  double worst = -1e300;
  std::size_t checked = 0;
  for (int k = cz.k_lo; k <= cz.k_hi; ++k) {
    for (const CZCube& q : cz.cubes_at(k)) {
      for (int l = 0; l <= l_max; ++l) {
        double inter = 0.0;
        for (const CZCube& r : cz.cubes_at(k + l))
          if (q.cube.contains(r.cube)) inter += r.cube.volume_units();
        if (l == 0) inter = q.cube.volume_units();  // the cube itself is its own level set
        double bound = factor * std::pow(cz.gamma, -l) * q.cube.volume_units();
        worst = std::max(worst, inter - bound);
        ++checked;
      }
    }
  }
  rep.data["gamma"] = cz.gamma;
  rep.data["l_max"] = l_max;
  rep.data["checked"] = checked;
  rep.data["worst_excess"] = worst;
  if (worst > 1e-12) rep.fail("level shrinkage bound violated");
  return rep;
}

namespace {

// Level sets as bitmasks over the grid's level-m mesh clipped to the box.
struct MeshWindow {
  ShiftedGrid grid;
  int m;
  std::int64_t jx0, jx1, jy0, jy1;
  std::size_t nx() const { return static_cast<std::size_t>(jx1 - jx0 + 1); }
  std::size_t ny() const { return static_cast<std::size_t>(jy1 - jy0 + 1); }
  std::size_t size() const { return nx() * ny(); }
};

MeshWindow mesh_window(const CZDecomposition& cz, const Box& box, int m) {
  MeshWindow w;
  w.grid = cz.grid;
  w.m = m;
  w.jx0 = grid_locate(cz.grid, 0, m, box.lo[0]);
  w.jx1 = grid_locate(cz.grid, 0, m, box.hi(0) - 1);
  if (cz.grid.n == 2) {
    w.jy0 = grid_locate(cz.grid, 1, m, box.lo[1]);
    w.jy1 = grid_locate(cz.grid, 1, m, box.hi(1) - 1);
  } else {
    w.jy0 = w.jy1 = 0;
  }
  return w;
}

std::vector<bool> mesh_set(const CZDecomposition& cz, const MeshWindow& w, int k) {
  std::vector<bool> bits(w.size(), false);
  for (const CZCube& q : cz.cubes_at(k)) {
    // Every grid cube is an exact union of level-m mesh cells.
    std::int64_t ax0 = grid_locate(cz.grid, 0, w.m, q.cube.lo[0]);
    std::int64_t count = q.cube.side / grid_side(w.m);
    std::int64_t ay0 = 0, county = 1;
    if (cz.grid.n == 2) {
      ay0 = grid_locate(cz.grid, 1, w.m, q.cube.lo[1]);
      county = count;
    }
    for (std::int64_t jy = std::max(ay0, w.jy0); jy < std::min(ay0 + county, w.jy1 + 1); ++jy)
      for (std::int64_t jx = std::max(ax0, w.jx0); jx < std::min(ax0 + count, w.jx1 + 1); ++jx)
        bits[static_cast<std::size_t>(jy - w.jy0) * w.nx() + static_cast<std::size_t>(jx - w.jx0)] = true;
  }
  return bits;
}

}  // namespace

ProbeReport check_level_telescoping(const CZDecomposition& cz, int nu_max) {
  ProbeReport rep;
  rep.id = "cz_level_telescoping";
  if (cz.local) throw std::invalid_argument("telescoping check expects a global decomposition");
  Box box = computational_box(cz.grid.n);
  int m = cz.table ? cz.table->level_max() : 8;
  MeshWindow w = mesh_window(cz, box, m);
  std::size_t mismatches = 0, checked = 0;
  for (int k = cz.k_lo; k <= cz.k_hi; ++k) {
    std::vector<bool> omega_k = mesh_set(cz, w, k);
    for (int nu = 1; nu <= nu_max; ++nu) {
      std::vector<bool> omega_knu = mesh_set(cz, w, k + nu);
      // union over i < nu of Omega_{k+i} \ Omega_{k+i+1}
      std::vector<bool> rhs(w.size(), false);
      for (int i = 0; i < nu; ++i) {
        std::vector<bool> a = mesh_set(cz, w, k + i);
        std::vector<bool> b = mesh_set(cz, w, k + i + 1);
        for (std::size_t t = 0; t < w.size(); ++t)
          if (a[t] && !b[t]) rhs[t] = true;
      }
      for (std::size_t t = 0; t < w.size(); ++t) {
        bool lhs = omega_k[t] && !omega_knu[t];
        if (lhs != rhs[t]) ++mismatches;
        ++checked;
      }
    }
  }
  rep.data["nu_max"] = nu_max;
  rep.data["cells_checked"] = checked;
  rep.data["mismatches"] = mismatches;
  if (mismatches) rep.fail("telescoping identity mismatch");
  return rep;
}

namespace {

void rasterize_add(LatticeFunction& out, const Cube& q, double coef) {
  const Box& b = out.box();
  Tick cell = out.cell_side();
  std::int64_t N = out.cells_per_axis();
  std::int64_t ny = out.dim() == 2 ? N : 1;
  // Cells whose center lies in q; conservative range then exact tick test.
  std::int64_t ix0 = std::max<std::int64_t>(0, (q.lo[0] - b.lo[0]) / cell - 1);
  std::int64_t ix1 = std::min<std::int64_t>(N - 1, (q.lo[0] + q.side - b.lo[0]) / cell + 1);
  std::int64_t iy0 = 0, iy1 = ny - 1;
  if (out.dim() == 2) {
    iy0 = std::max<std::int64_t>(0, (q.lo[1] - b.lo[1]) / cell - 1);
    iy1 = std::min<std::int64_t>(N - 1, (q.lo[1] + q.side - b.lo[1]) / cell + 1);
  }
  if (ix1 < 0 || iy1 < 0) return;
  ix0 = std::max<std::int64_t>(0, ix0);
  iy0 = std::max<std::int64_t>(0, iy0);
  for (std::int64_t iy = iy0; iy <= iy1; ++iy)
    for (std::int64_t ix = ix0; ix <= ix1; ++ix) {
      auto c = out.cell_center(ix, iy);
      if (q.contains_point(c)) out[out.flat_index(ix, iy)] += coef;
    }
}

}  // namespace

std::uint64_t SparseFamily::hash() const {
  std::uint64_t h = kFnvBasis;
  h = fnv1a(h, &eta, sizeof eta);
  h = fnv1a(h, grid.s.data(), sizeof grid.s);
  for (const auto& e : entries) {
    h = fnv1a(h, &e.q.level, sizeof e.q.level);
    h = fnv1a(h, e.q.idx.data(), sizeof e.q.idx);
  }
  return h;
}

SparseResult sparse_from_maximal(const LatticeFunction& f, const ShiftedGrid& grid, double eta) {
  if (!(eta > 0.0 && eta < 1.0)) throw std::invalid_argument("sparsity parameter must be in (0,1)");
  for (std::size_t i = 0; i < f.size(); ++i)
    if (f[i] < 0) throw std::invalid_argument("sparse_from_maximal requires f >= 0");

  const int n = f.dim();
  double gamma = (n == 2 ? 4.0 : 2.0) / (1.0 - eta);
  SparseResult res;
  res.decomposition = cz_decompose(f, grid, gamma);
  const CZDecomposition& cz = res.decomposition;
  res.family.eta = eta;
  res.family.grid = grid;

  for (int k = cz.k_lo; k <= cz.k_hi; ++k) {
    for (const CZCube& q : cz.cubes_at(k)) {
      SparseEntry e;
      e.q = *q.addr;
      e.k = k;
      e.volume = q.cube.volume_units();
      double removed_vol = 0.0;
      for (const CZCube& r : cz.cubes_at(k + 1))
        if (q.cube.contains(r.cube)) {
          e.removed.push_back(*r.addr);
          removed_vol += r.cube.volume_units();
        }
      e.e_volume = e.volume - removed_vol;
      e.f_avg = q.avg;
      res.family.entries.push_back(std::move(e));
    }
  }

  // Pointwise domination certificate at every cell center.
  ProbeReport& rep = res.certificate;
  rep.id = "sparse_domination";
  double constant = gamma;  // 2^n / (1 - eta)
  LatticeFunction mf = grid_maximal_from_table(f, *cz.table);
  LatticeFunction rhs(n, f.resolution(), 0.0, false);
  for (const SparseEntry& e : res.family.entries) {
    rasterize_add(rhs, realize(e.q), e.f_avg);
    for (const GridCube& r : e.removed) rasterize_add(rhs, realize(r), -e.f_avg);
  }
  double worst = -1e300;
  for (std::size_t i = 0; i < mf.size(); ++i)
    worst = std::max(worst, mf[i] - constant * rhs[i]);
  rep.data["eta"] = eta;
  rep.data["gamma"] = gamma;
  rep.data["constant"] = constant;
  rep.data["entries"] = res.family.entries.size();
  rep.data["worst_excess"] = worst;
  rep.data["family_hash"] = res.family.hash();
  if (worst > 1e-12) rep.fail("pointwise sparse domination violated");
  return res;
}

ProbeReport verify_sparse_family(const SparseFamily& s) {
  ProbeReport rep;
  rep.id = "sparse_family_geometry";
  bool sparsity_ok = true, disjoint_ok = true, volume_ok = true;
  for (const auto& e : s.entries) {
    Cube q = realize(e.q);
    double removed = 0.0;
    for (std::size_t i = 0; i < e.removed.size(); ++i) {
      Cube ri = realize(e.removed[i]);
      if (!q.contains(ri)) volume_ok = false;
      removed += ri.volume_units();
      for (std::size_t j = i + 1; j < e.removed.size(); ++j) {
        Cube rj = realize(e.removed[j]);
        bool apart = false;
        for (int a = 0; a < q.n; ++a)
          if (ri.lo[a] + ri.side <= rj.lo[a] || rj.lo[a] + rj.side <= ri.lo[a]) apart = true;
        if (!apart) disjoint_ok = false;
      }
    }
    if (std::fabs((q.volume_units() - removed) - e.e_volume) > 1e-15 * q.volume_units())
      volume_ok = false;
    if (e.e_volume + 1e-15 * q.volume_units() < s.eta * q.volume_units()) sparsity_ok = false;
  }
  // E(Q) and E(R) for distinct entries are disjoint: same-level cubes are
  // disjoint, and deeper entries sit inside removed regions of shallower
  // ones.  Verified pairwise on the symbolic representation.
  for (std::size_t i = 0; i < s.entries.size() && disjoint_ok; ++i) {
    for (std::size_t j = i + 1; j < s.entries.size(); ++j) {
      Cube qi = realize(s.entries[i].q), qj = realize(s.entries[j].q);
      bool apart = false;
      for (int a = 0; a < qi.n; ++a)
        if (qi.lo[a] + qi.side <= qj.lo[a] || qj.lo[a] + qj.side <= qi.lo[a]) apart = true;
      if (apart) continue;
      const SparseEntry* outer = &s.entries[i];
      Cube inner_cube = qj;
      if (qj.contains(qi)) {
        outer = &s.entries[j];
        inner_cube = qi;
      } else if (!qi.contains(qj)) {
        disjoint_ok = false;
        break;
      }
      bool covered = false;
      for (const GridCube& r : outer->removed)
        if (realize(r).contains(inner_cube)) {
          covered = true;
          break;
        }
      if (!covered) disjoint_ok = false;
    }
  }
  rep.data["entries"] = s.entries.size();
  rep.data["eta"] = s.eta;
  rep.data["sparsity_ok"] = sparsity_ok;
  rep.data["pairwise_disjoint_ok"] = disjoint_ok;
  rep.data["volumes_ok"] = volume_ok;
  if (!sparsity_ok) rep.fail("eta |Q| <= |E(Q)| violated");
  if (!disjoint_ok) rep.fail("E(Q) sets not pairwise disjoint");
  if (!volume_ok) rep.fail("symbolic volumes inconsistent");
  return rep;
}


LatticeFunction sparse_operator(const SparseFamily& s, const LatticeFunction& f) {
  LatticeFunction out(f.dim(), f.resolution(), 0.0, false);
  for (const auto& e : s.entries) {
    Cube q = realize(e.q);
    double avg = integrate(f, q) / q.volume_units();
    rasterize_add(out, q, avg);
    for (const GridCube& r : e.removed) rasterize_add(out, realize(r), -avg);
  }
  return out;
}

LatticeFunction adjoint_sparse_operator(const SparseFamily& s, const LatticeFunction& f) {
  LatticeFunction out(f.dim(), f.resolution(), 0.0, false);
  for (const auto& e : s.entries) {
    Cube q = realize(e.q);
    double on_e = integrate(f, q);
    for (const GridCube& r : e.removed) on_e -= integrate(f, realize(r));
    rasterize_add(out, q, on_e / q.volume_units());
  }
  return out;
}

double pairing_with_sparse(const SparseFamily& s, const LatticeFunction& f, const LatticeFunction& g) {
  double acc = 0.0;
  for (const auto& e : s.entries) {
    Cube q = realize(e.q);
    double avg_f = integrate(f, q) / q.volume_units();
    double g_on_e = integrate(g, q);
    for (const GridCube& r : e.removed) g_on_e -= integrate(g, realize(r));
    acc += avg_f * g_on_e;
  }
  return acc;
}

double pairing_with_adjoint(const SparseFamily& s, const LatticeFunction& f, const LatticeFunction& g) {
  double acc = 0.0;
  for (const auto& e : s.entries) {
    Cube q = realize(e.q);
    double g_on_e = integrate(g, q);
    for (const GridCube& r : e.removed) g_on_e -= integrate(g, realize(r));
    acc += g_on_e / q.volume_units() * integrate(f, q);
  }
  return acc;
}

std::string to_json(const SparseFamily& s) {
  nlohmann::ordered_json j;
  j["eta"] = s.eta;
  j["grid_shift"] = {s.grid.s[0], s.grid.s[1]};
  j["n"] = s.grid.n;
  j["family_hash"] = s.hash();
  auto arr = nlohmann::ordered_json::array();
  for (const auto& e : s.entries) {
    nlohmann::ordered_json je;
    je["level"] = e.q.level;
    je["index"] = {e.q.idx[0], e.q.idx[1]};
    je["k"] = e.k;
    auto removed = nlohmann::ordered_json::array();
    for (const auto& r : e.removed)
      removed.push_back({{"level", r.level}, {"index", {r.idx[0], r.idx[1]}}});
    je["E"] = {{"type", "cube_minus_cubes"}, {"removed", removed}};
    je["volume"] = e.volume;
    je["E_volume"] = e.e_volume;
    arr.push_back(je);
  }
  j["entries"] = arr;
  return j.dump(2);
}

}  // namespace maxdual
