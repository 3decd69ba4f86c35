#include "maxdual/maximal.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <stdexcept>

#include "maxdual/rng.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace maxdual {

std::string MaximalKind::label() const {
  switch (type) {
    case Type::Full: return "full";
    case Type::Grid: return "grid:" + grid.label();
    case Type::LocalDyadic: return "local";
  }
  return "?";
}

// ---------------------------------------------------------------------------
// GridIntegralTable

GridIntegralTable::GridIntegralTable(const LatticeFunction& f_abs, const ShiftedGrid& g,
                                     int level_min)
    : grid_(g),
      level_min_(level_min),
      level_max_(f_abs.resolution()),
      n_(f_abs.dim()),
      box_(f_abs.box()),
      source_(&f_abs) {
  if (level_min > level_max_) throw std::invalid_argument("grid table: empty level range");
  levels_.resize(static_cast<std::size_t>(level_max_ - level_min_ + 1));
  for (int level = level_max_; level >= level_min_; --level) build_level(level, &f_abs);
}

void GridIntegralTable::build_level(int level, const LatticeFunction* f) {
  Level& L = levels_[static_cast<std::size_t>(level - level_min_)];
  L.jx0 = grid_locate(grid_, 0, level, box_.lo[0]);
  L.jx1 = grid_locate(grid_, 0, level, box_.hi(0) - 1);
  if (n_ == 2) {
    L.jy0 = grid_locate(grid_, 1, level, box_.lo[1]);
    L.jy1 = grid_locate(grid_, 1, level, box_.hi(1) - 1);
  } else {
    L.jy0 = L.jy1 = 0;
  }
  std::size_t nx = static_cast<std::size_t>(L.jx1 - L.jx0 + 1);
  std::size_t ny = static_cast<std::size_t>(L.jy1 - L.jy0 + 1);
  L.integral.assign(nx * ny, 0.0);

  if (level == level_max_) {
    // Leaf level: cube side equals the cell side; exact clipped integration.
    for (std::int64_t jy = L.jy0; jy <= L.jy1; ++jy)
      for (std::int64_t jx = L.jx0; jx <= L.jx1; ++jx) {
        GridCube gc{grid_, level, {jx, jy}};
        L.integral[static_cast<std::size_t>(jy - L.jy0) * nx +
                   static_cast<std::size_t>(jx - L.jx0)] = integrate(*f, realize(gc));
      }
    return;
  }
  // Children tile the parent, so the parent integral is their exact sum.
  for (std::int64_t jy = L.jy0; jy <= L.jy1; ++jy)
    for (std::int64_t jx = L.jx0; jx <= L.jx1; ++jx) {
      GridCube gc{grid_, level, {jx, jy}};
      double acc = 0.0;
      for (const GridCube& c : children(gc)) acc += integral_of(c.level, c.idx[0], c.idx[1]);
      L.integral[static_cast<std::size_t>(jy - L.jy0) * nx +
                 static_cast<std::size_t>(jx - L.jx0)] = acc;
    }
}

double GridIntegralTable::integral_of(int level, std::int64_t jx, std::int64_t jy) const {
  if (level < level_min_ || level > level_max_) return 0.0;
  const Level& L = at(level);
  if (jx < L.jx0 || jx > L.jx1 || jy < L.jy0 || jy > L.jy1) return 0.0;
  std::size_t nx = static_cast<std::size_t>(L.jx1 - L.jx0 + 1);
  return L.integral[static_cast<std::size_t>(jy - L.jy0) * nx + static_cast<std::size_t>(jx - L.jx0)];
}

double GridIntegralTable::average_of(int level, std::int64_t jx, std::int64_t jy) const {
  double vol = Cube{n_, {0, 0}, grid_side(level)}.volume_units();
  return integral_of(level, jx, jy) / vol;
}

void GridIntegralTable::extend_top(int new_level_min) {
  if (new_level_min >= level_min_) return;
  if (new_level_min < kMinGridLevel) throw std::invalid_argument("grid table: level below tick range");
  std::vector<Level> extended(static_cast<std::size_t>(level_max_ - new_level_min + 1));
  std::move(levels_.begin(), levels_.end(),
            extended.begin() + (level_min_ - new_level_min));
  levels_ = std::move(extended);
  int old_min = level_min_;
  level_min_ = new_level_min;
  for (int level = old_min - 1; level >= new_level_min; --level) build_level(level, source_);
}

std::int64_t GridIntegralTable::jx_begin(int level) const { return at(level).jx0; }
std::int64_t GridIntegralTable::jx_end(int level) const { return at(level).jx1 + 1; }
std::int64_t GridIntegralTable::jy_begin(int level) const { return at(level).jy0; }
std::int64_t GridIntegralTable::jy_end(int level) const { return at(level).jy1 + 1; }

// ---------------------------------------------------------------------------
// Full maximal operator: per-window-size sliding maxima over prefix sums.

namespace {

// out[i] = max over s in [max(0, i-t+1), min(i, L-1)] of arr[s];
// both window ends are nondecreasing in i, so a monotone deque applies.
void sliding_window_max(const std::vector<double>& arr, int t, std::vector<double>& out) {
  const std::int64_t N = static_cast<std::int64_t>(out.size());
  const std::int64_t L = static_cast<std::int64_t>(arr.size());
  std::deque<std::int64_t> dq;
  std::int64_t r = -1;
  for (std::int64_t i = 0; i < N; ++i) {
    std::int64_t r_hi = std::min(i, L - 1);
    while (r < r_hi) {
      ++r;
      while (!dq.empty() && arr[static_cast<std::size_t>(dq.back())] <= arr[static_cast<std::size_t>(r)])
        dq.pop_back();
      dq.push_back(r);
    }
    std::int64_t lo = std::max<std::int64_t>(0, i - t + 1);
    while (dq.front() < lo) dq.pop_front();
    out[static_cast<std::size_t>(i)] = arr[static_cast<std::size_t>(dq.front())];
  }
}

LatticeFunction maximal_full_1d(const LatticeFunction& f) {
  const std::int64_t N = f.cells_per_axis();
  std::vector<double> prefix(static_cast<std::size_t>(N) + 1, 0.0);
  for (std::int64_t i = 0; i < N; ++i)
    prefix[static_cast<std::size_t>(i + 1)] = prefix[static_cast<std::size_t>(i)] + std::fabs(f.at(i));

  LatticeFunction out(1, f.resolution(), 0.0, true);
#ifdef _OPENMP
#pragma omp parallel
#endif
  {
    std::vector<double> local(static_cast<std::size_t>(N), 0.0);
    std::vector<double> sums, winmax(static_cast<std::size_t>(N));
#ifdef _OPENMP
#pragma omp for schedule(static) nowait
#endif
    for (std::int64_t t = 1; t <= N; ++t) {
      std::int64_t L = N - t + 1;
      sums.assign(static_cast<std::size_t>(L), 0.0);
      for (std::int64_t s = 0; s < L; ++s)
        sums[static_cast<std::size_t>(s)] =
            prefix[static_cast<std::size_t>(s + t)] - prefix[static_cast<std::size_t>(s)];
      sliding_window_max(sums, static_cast<int>(t), winmax);
      double inv = 1.0 / (static_cast<double>(t));
      for (std::int64_t i = 0; i < N; ++i) {
        double v = winmax[static_cast<std::size_t>(i)] * inv;
        if (v > local[static_cast<std::size_t>(i)]) local[static_cast<std::size_t>(i)] = v;
      }
    }
#ifdef _OPENMP
#pragma omp critical
#endif
    for (std::int64_t i = 0; i < N; ++i)
      if (local[static_cast<std::size_t>(i)] > out[static_cast<std::size_t>(i)])
        out[static_cast<std::size_t>(i)] = local[static_cast<std::size_t>(i)];
  }
  return out;
}

LatticeFunction maximal_full_2d(const LatticeFunction& f) {
  const std::int64_t N = f.cells_per_axis();
  // prefix[iy][ix] = sum of |f| over cells [0..ix) x [0..iy)
  std::vector<double> prefix(static_cast<std::size_t>((N + 1) * (N + 1)), 0.0);
  auto P = [&](std::int64_t ix, std::int64_t iy) -> double& {
    return prefix[static_cast<std::size_t>(iy * (N + 1) + ix)];
  };
  for (std::int64_t iy = 0; iy < N; ++iy)
    for (std::int64_t ix = 0; ix < N; ++ix)
      P(ix + 1, iy + 1) = std::fabs(f.at(ix, iy)) + P(ix, iy + 1) + P(ix + 1, iy) - P(ix, iy);

  LatticeFunction out(2, f.resolution(), 0.0, true);
#ifdef _OPENMP
#pragma omp parallel
#endif
  {
    std::vector<double> local(out.size(), 0.0);
    std::vector<double> rect, rowmax, colin(static_cast<std::size_t>(N)), colout(static_cast<std::size_t>(N));
#ifdef _OPENMP
#pragma omp for schedule(static) nowait
#endif
    for (std::int64_t t = 1; t <= N; ++t) {
      std::int64_t L = N - t + 1;
      rect.assign(static_cast<std::size_t>(L * L), 0.0);
      for (std::int64_t sy = 0; sy < L; ++sy)
        for (std::int64_t sx = 0; sx < L; ++sx)
          rect[static_cast<std::size_t>(sy * L + sx)] =
              P(sx + t, sy + t) - P(sx, sy + t) - P(sx + t, sy) + P(sx, sy);
      // max over sx per row, then over sy per column
      rowmax.assign(static_cast<std::size_t>(L * N), 0.0);
      std::vector<double> rowin(static_cast<std::size_t>(L)), rowout(static_cast<std::size_t>(N));
      for (std::int64_t sy = 0; sy < L; ++sy) {
        for (std::int64_t sx = 0; sx < L; ++sx)
          rowin[static_cast<std::size_t>(sx)] = rect[static_cast<std::size_t>(sy * L + sx)];
        sliding_window_max(rowin, static_cast<int>(t), rowout);
        for (std::int64_t ix = 0; ix < N; ++ix)
          rowmax[static_cast<std::size_t>(sy * N + ix)] = rowout[static_cast<std::size_t>(ix)];
      }
      double inv = 1.0 / (static_cast<double>(t) * static_cast<double>(t));
      for (std::int64_t ix = 0; ix < N; ++ix) {
        colin.assign(static_cast<std::size_t>(L), 0.0);
        for (std::int64_t sy = 0; sy < L; ++sy)
          colin[static_cast<std::size_t>(sy)] = rowmax[static_cast<std::size_t>(sy * N + ix)];
        sliding_window_max(colin, static_cast<int>(t), colout);
        for (std::int64_t iy = 0; iy < N; ++iy) {
          double v = colout[static_cast<std::size_t>(iy)] * inv;
          std::size_t flat = static_cast<std::size_t>(iy * N + ix);
          if (v > local[flat]) local[flat] = v;
        }
      }
    }
#ifdef _OPENMP
#pragma omp critical
#endif
    for (std::size_t i = 0; i < out.size(); ++i)
      if (local[i] > out[i]) out[i] = local[i];
  }
  return out;
}

}  // namespace

LatticeFunction grid_maximal_from_table(const LatticeFunction& f, const GridIntegralTable& table) {
  const ShiftedGrid& g = table.grid();
  const int m = f.resolution();
  const int n = f.dim();
  // best[level][j] = max average over the cube and all its stored ancestors
  std::vector<std::vector<double>> best(static_cast<std::size_t>(m - table.level_min() + 1));
  for (int level = table.level_min(); level <= m; ++level) {
    std::int64_t nx = table.jx_end(level) - table.jx_begin(level);
    std::int64_t ny = table.jy_end(level) - table.jy_begin(level);
    auto& cur = best[static_cast<std::size_t>(level - table.level_min())];
    cur.assign(static_cast<std::size_t>(nx * ny), 0.0);
    for (std::int64_t jy = table.jy_begin(level); jy < table.jy_end(level); ++jy)
      for (std::int64_t jx = table.jx_begin(level); jx < table.jx_end(level); ++jx) {
        double v = table.average_of(level, jx, jy);
        if (level > table.level_min()) {
          GridCube par = parent(GridCube{g, level, {jx, jy}});
          std::int64_t px0 = table.jx_begin(level - 1), py0 = table.jy_begin(level - 1);
          std::int64_t pnx = table.jx_end(level - 1) - px0;
          if (par.idx[0] >= px0 && par.idx[0] < table.jx_end(level - 1) &&
              par.idx[1] >= py0 && par.idx[1] < table.jy_end(level - 1)) {
            double pv = best[static_cast<std::size_t>(level - 1 - table.level_min())]
                            [static_cast<std::size_t>((par.idx[1] - py0) * pnx + (par.idx[0] - px0))];
            v = std::max(v, pv);
          }
        }
        cur[static_cast<std::size_t>((jy - table.jy_begin(level)) * nx +
                                     (jx - table.jx_begin(level)))] = v;
      }
  }
  LatticeFunction out(n, m, 0.0, true);
  const auto& leaf = best[static_cast<std::size_t>(m - table.level_min())];
  std::int64_t lx0 = table.jx_begin(m), ly0 = table.jy_begin(m);
  std::int64_t lnx = table.jx_end(m) - lx0;
  std::int64_t ny = n == 2 ? f.cells_per_axis() : 1;
  for (std::int64_t iy = 0; iy < ny; ++iy)
    for (std::int64_t ix = 0; ix < f.cells_per_axis(); ++ix) {
      auto c = f.cell_center(ix, iy);
      GridCube gc = grid_cube_at(g, m, c);
      out.set(ix, iy, leaf[static_cast<std::size_t>((gc.idx[1] - ly0) * lnx + (gc.idx[0] - lx0))]);
    }
  return out;
}

namespace {

void local_dyadic_walk(const LatticeFunction& absf, const Cube& cube, double best,
                       LatticeFunction& out) {
  double vol = cube.volume_units();
  double a = integrate(absf, cube) / vol;
  best = std::max(best, a);
  if (cube.side / 2 >= absf.cell_side()) {
    Tick half = cube.side / 2;
    int count = absf.dim() == 2 ? 4 : 2;
    for (int bits = 0; bits < count; ++bits) {
      Cube child = cube;
      child.side = half;
      for (int a2 = 0; a2 < absf.dim(); ++a2)
        if ((bits >> a2) & 1) child.lo[a2] += half;
      local_dyadic_walk(absf, child, best, out);
    }
    return;
  }
  // Leaf: assign to cells whose center lies in the cube.
  const Box& b = absf.box();
  Tick cell = absf.cell_side();
  std::int64_t ix0 = std::max<std::int64_t>(0, (cube.lo[0] - b.lo[0]) / cell);
  std::int64_t ix1 = std::min<std::int64_t>(absf.cells_per_axis() - 1,
                                            (cube.lo[0] + cube.side - b.lo[0]) / cell);
  std::int64_t iy0 = 0, iy1 = 0;
  if (absf.dim() == 2) {
    iy0 = std::max<std::int64_t>(0, (cube.lo[1] - b.lo[1]) / cell);
    iy1 = std::min<std::int64_t>(absf.cells_per_axis() - 1,
                                 (cube.lo[1] + cube.side - b.lo[1]) / cell);
  }
  for (std::int64_t iy = iy0; iy <= iy1; ++iy)
    for (std::int64_t ix = ix0; ix <= ix1; ++ix) {
      auto c = absf.cell_center(ix, iy);
      if (cube.contains_point(c)) {
        std::size_t flat = out.flat_index(ix, iy);
        if (best > out[flat]) out[flat] = best;
      }
    }
}

}  // namespace

LatticeFunction maximal(const LatticeFunction& f, const MaximalKind& kind) {
  f.validate();
  switch (kind.type) {
    case MaximalKind::Type::Full:
      return f.dim() == 1 ? maximal_full_1d(f) : maximal_full_2d(f);
    case MaximalKind::Type::Grid: {
      LatticeFunction absf = f.abs();
      GridIntegralTable table(absf, kind.grid, kGridMaximalTopLevel);
      return grid_maximal_from_table(f, table);
    }
    case MaximalKind::Type::LocalDyadic: {
      if (!box_contains(f.box(), kind.q0.box()))
        throw std::invalid_argument("local dyadic base cube outside computational box");
      LatticeFunction absf = f.abs();
      LatticeFunction out(f.dim(), f.resolution(), 0.0, true);
      local_dyadic_walk(absf, kind.q0, 0.0, out);
      return out;
    }
  }
  throw std::logic_error("unknown maximal kind");
}

ProbeReport check_grid_comparison(const LatticeFunction& f) {
  ProbeReport rep;
  rep.id = "grid_comparison";
  const int n = f.dim();
  double factor = n == 2 ? 36.0 : 6.0;
  LatticeFunction full = maximal(f, MaximalKind::full());
  std::vector<LatticeFunction> gm;
  for (const auto& g : build_shifted_grids(n)) gm.push_back(maximal(f, MaximalKind::grid_kind(g)));

  double worst_violation = -1e300, worst_ratio = 0.0;
  for (std::size_t i = 0; i < full.size(); ++i) {
    double rhs = 0.0;
    for (const auto& g : gm) rhs += g[i];
    rhs *= factor;
    worst_violation = std::max(worst_violation, full[i] - rhs);
    if (rhs > 0) worst_ratio = std::max(worst_ratio, full[i] / rhs);
  }
  rep.data["factor"] = factor;
  rep.data["worst_violation"] = worst_violation;
  rep.data["worst_ratio"] = worst_ratio;
  if (worst_violation > 1e-12) rep.fail("full maximal exceeds 6^n sum of grid maximals");
  return rep;
}

// ---------------------------------------------------------------------------
// Candidates and operator-norm lower bounds

std::uint64_t CandidateFamily::hash(int n, int m) const {
  std::uint64_t h = kFnvBasis;
  h = fnv1a(h, name.data(), name.size());
  h = fnv1a(h, &seed, sizeof seed);
  int counts[6] = {random_count, cell_spikes, dyadic_blocks, power_spikes, weight_adapted,
                   include_constant ? 1 : 0};
  h = fnv1a(h, counts, sizeof counts);
  h = fnv1a(h, &n, sizeof n);
  h = fnv1a(h, &m, sizeof m);
  return h;
}

std::vector<std::pair<std::string, LatticeFunction>> generate_candidates(
    const CandidateFamily& fam, int n, int m, const ExponentField& p, const WeightField& w) {
  std::vector<std::pair<std::string, LatticeFunction>> out;
  Rng rng(fam.seed);
  Box supp = support_box(n);
  LatticeFunction proto(n, m);
  const std::int64_t cells = proto.cells_per_axis();
  const std::int64_t s0 = (supp.lo[0] - proto.box().lo[0]) / proto.cell_side();
  const std::int64_t scount = supp.len[0] / proto.cell_side();

  auto in_support = [&](std::int64_t ix, std::int64_t iy) {
    bool ok = ix >= s0 && ix < s0 + scount;
    if (n == 2) ok = ok && iy >= s0 && iy < s0 + scount;
    return ok;
  };

  if (fam.include_constant) {
    out.emplace_back("const1", LatticeFunction(n, m, 1.0, true));
  }
  for (int r = 0; r < fam.random_count; ++r) {
    LatticeFunction f(n, m, 0.0, true);
    std::int64_t ny = n == 2 ? cells : 1;
    for (std::int64_t iy = 0; iy < ny; ++iy)
      for (std::int64_t ix = 0; ix < cells; ++ix)
        if (in_support(ix, iy)) f.set(ix, iy, rng.uniform());
    out.emplace_back("random" + std::to_string(r), std::move(f));
  }
  for (int r = 0; r < fam.cell_spikes; ++r) {
    LatticeFunction f(n, m, 0.0, true);
    std::int64_t ix = s0 + static_cast<std::int64_t>(rng.below(static_cast<std::uint64_t>(scount)));
    std::int64_t iy = n == 2 ? s0 + static_cast<std::int64_t>(rng.below(static_cast<std::uint64_t>(scount))) : 0;
    f.set(ix, iy, 1.0 / f.cell_volume_units());
    out.emplace_back("cell_spike" + std::to_string(r), std::move(f));
  }
  for (int r = 0; r < fam.dyadic_blocks; ++r) {
    int depth = 1 + static_cast<int>(rng.below(static_cast<std::uint64_t>(std::max(1, m - 1))));
    std::int64_t blocks = std::int64_t(1) << depth;
    std::int64_t bx = static_cast<std::int64_t>(rng.below(static_cast<std::uint64_t>(blocks)));
    std::int64_t by = n == 2 ? static_cast<std::int64_t>(rng.below(static_cast<std::uint64_t>(blocks))) : 0;
    Tick bl = kTickDen >> depth;
    Box block{n, {supp.lo[0] + bx * bl, supp.lo[1] + by * bl}, {bl, n == 2 ? bl : Tick(0)}};
    LatticeFunction f(n, m, 0.0, true);
    std::int64_t ny = n == 2 ? cells : 1;
    for (std::int64_t iy = 0; iy < ny; ++iy)
      for (std::int64_t ix = 0; ix < cells; ++ix) {
        auto c = f.cell_center(ix, iy);
        bool inside = c[0] >= block.lo[0] && c[0] < block.hi(0);
        if (n == 2) inside = inside && c[1] >= block.lo[1] && c[1] < block.hi(1);
        if (inside) f.set(ix, iy, 1.0);
      }
    out.emplace_back("dyadic_block" + std::to_string(r), std::move(f));
  }
  for (int r = 0; r < fam.power_spikes; ++r) {
    // Truncated |x-x0|^-beta with beta p_+ < n, so the modular stays finite.
    double beta = 0.8 * static_cast<double>(n) / p.pplus();
    std::array<double, 2> x0{rng.uniform(0.2, 0.8), rng.uniform(0.2, 0.8)};
    LatticeFunction f(n, m, 0.0, true);
    double cap = std::pow(0.5 * f.cell_side_units(), -beta);
    std::int64_t ny = n == 2 ? cells : 1;
    for (std::int64_t iy = 0; iy < ny; ++iy)
      for (std::int64_t ix = 0; ix < cells; ++ix) {
        if (!in_support(ix, iy)) continue;
        auto c = f.cell_center_units(ix, iy);
        double dx = c[0] - x0[0], dy = n == 2 ? c[1] - x0[1] : 0.0;
        double d = std::sqrt(dx * dx + dy * dy);
        f.set(ix, iy, std::min(cap, std::pow(std::max(d, 1e-300), -beta)));
      }
    out.emplace_back("power_spike" + std::to_string(r), std::move(f));
  }
  // Weight-adapted profiles w^{-p'} on shrinking blocks around the support
  // midpoint: the classical extremal input for the averaging operator.
  ExponentField pc = conjugate(p);
  for (int r = 0; r < fam.weight_adapted; ++r) {
    Tick halfwidth = kTickDen >> (r + 1);
    Tick mid = kTickDen / 2;
    Box block{n,
              {supp.lo[0] + mid - halfwidth, supp.lo[1] + (n == 2 ? mid - halfwidth : 0)},
              {2 * halfwidth, n == 2 ? 2 * halfwidth : Tick(0)}};
    LatticeFunction f(n, m, 0.0, true);
    std::int64_t ny = n == 2 ? cells : 1;
    bool finite = true;
    for (std::int64_t iy = 0; iy < ny && finite; ++iy)
      for (std::int64_t ix = 0; ix < cells; ++ix) {
        auto c = f.cell_center(ix, iy);
        bool inside = c[0] >= block.lo[0] && c[0] < block.hi(0);
        if (n == 2) inside = inside && c[1] >= block.lo[1] && c[1] < block.hi(1);
        if (!inside) continue;
        std::size_t flat = f.flat_index(ix, iy);
        double v = std::pow(w.at_flat(flat), -pc.values()[flat]);
        if (!std::isfinite(v)) { finite = false; break; }
        f.set(ix, iy, v);
      }
    if (finite) out.emplace_back("weight_adapted" + std::to_string(r), std::move(f));
  }
  return out;
}

std::optional<double> maximal_norm_ratio(const MaximalKind& kind, const ExponentField& p,
                                         const WeightField& w, const LatticeFunction& f) {
  double nf = weighted_norm(f, p, w);
  if (!(nf > 0) || !std::isfinite(nf)) return std::nullopt;
  double nmf = weighted_norm(maximal(f, kind), p, w);
  if (!std::isfinite(nmf)) return std::nullopt;
  return nmf / nf;
}

DualNormEstimates dual_operator_norm_lower_bounds(const MaximalKind& kind, const ExponentField& p,
                                                  const WeightField& w, const CandidateFamily& fam) {
  DualNormEstimates est;
  est.primal.report.id = "operator_norm_lower_bound";
  est.dual.report.id = "operator_norm_lower_bound_dual";
  ExponentField pc = conjugate(p);
  WeightField wi = w.inverse();
  auto candidates = generate_candidates(fam, p.dim(), p.resolution(), p, w);
  auto candidates_dual = generate_candidates(fam, p.dim(), p.resolution(), pc, wi);
  candidates.insert(candidates.end(), candidates_dual.begin(), candidates_dual.end());

  std::vector<std::string> header{"candidate_index", "ratio_primal", "ratio_dual"};
  est.primal.report.csv_header = header;
  for (std::size_t ci = 0; ci < candidates.size(); ++ci) {
    const auto& [label, f] = candidates[ci];
    LatticeFunction mf = maximal(f, kind);
    double nf = weighted_norm(f, p, w);
    double nmf = weighted_norm(mf, p, w);
    double nfd = weighted_norm(f, pc, wi);
    double nmfd = weighted_norm(mf, pc, wi);
    double rp = 0.0, rd = 0.0;
    if (nf > 0 && std::isfinite(nf) && std::isfinite(nmf)) {
      rp = nmf / nf;
      if (rp > est.primal.value) {
        est.primal.value = rp;
        est.primal.argmax = label;
      }
    } else {
      est.primal.report.note("skipped candidate '" + label + "' (zero or non-finite norm)");
    }
    if (nfd > 0 && std::isfinite(nfd) && std::isfinite(nmfd)) {
      rd = nmfd / nfd;
      if (rd > est.dual.value) {
        est.dual.value = rd;
        est.dual.argmax = label;
      }
    }
    est.primal.report.csv_rows.push_back({static_cast<double>(ci), rp, rd});
  }
  for (auto* e : {&est.primal, &est.dual}) {
    e->report.data["estimate_kind"] = "lower_bound";
    e->report.data["value"] = e->value;
    e->report.data["argmax"] = e->argmax;
    e->report.data["maximal_kind"] = kind.label();
    e->report.data["family_hash"] = fam.hash(p.dim(), p.resolution());
    e->report.data["seed"] = fam.seed;
    e->report.note("value is an empirical lower bound for the operator norm, not ground truth");
  }
  return est;
}

OperatorNormEstimate operator_norm_lower_bound(const MaximalKind& kind, const ExponentField& p,
                                               const WeightField& w, const CandidateFamily& fam) {
  return dual_operator_norm_lower_bounds(kind, p, w, fam).primal;
}

// ---------------------------------------------------------------------------
// Serial reference implementations

namespace ref {

LatticeFunction maximal_full(const LatticeFunction& f) {
  const std::int64_t N = f.cells_per_axis();
  const int n = f.dim();
  LatticeFunction out(n, f.resolution(), 0.0, true);
  if (n == 1) {
    // Cell-value averages over windows equal function averages for
    // piecewise-constant f, so no h factors appear.
    std::vector<double> prefix(static_cast<std::size_t>(N) + 1, 0.0);
    for (std::int64_t i = 0; i < N; ++i)
      prefix[static_cast<std::size_t>(i + 1)] = prefix[static_cast<std::size_t>(i)] + std::fabs(f.at(i));
    for (std::int64_t i = 0; i < N; ++i) {
      double best = 0.0;
      for (std::int64_t t = 1; t <= N; ++t)
        for (std::int64_t s = std::max<std::int64_t>(0, i - t + 1); s <= std::min(i, N - t); ++s) {
          double avg = (prefix[static_cast<std::size_t>(s + t)] - prefix[static_cast<std::size_t>(s)]) /
                       static_cast<double>(t);
          best = std::max(best, avg);
        }
      out[static_cast<std::size_t>(i)] = best;
    }
    return out;
  }
  for (std::int64_t iy = 0; iy < N; ++iy)
    for (std::int64_t ix = 0; ix < N; ++ix) {
      double best = 0.0;
      for (std::int64_t t = 1; t <= N; ++t) {
        for (std::int64_t sy = std::max<std::int64_t>(0, iy - t + 1); sy <= std::min(iy, N - t); ++sy)
          for (std::int64_t sx = std::max<std::int64_t>(0, ix - t + 1); sx <= std::min(ix, N - t); ++sx) {
            double acc = 0.0;
            for (std::int64_t y = sy; y < sy + t; ++y)
              for (std::int64_t x = sx; x < sx + t; ++x) acc += std::fabs(f.at(x, y));
            best = std::max(best, acc / static_cast<double>(t * t));
          }
      }
      out.set(ix, iy, best);
    }
  return out;
}

LatticeFunction maximal_grid(const LatticeFunction& f, const ShiftedGrid& g, int level_min) {
  LatticeFunction absf = f.abs();
  LatticeFunction out(f.dim(), f.resolution(), 0.0, true);
  std::int64_t ny = f.dim() == 2 ? f.cells_per_axis() : 1;
  for (std::int64_t iy = 0; iy < ny; ++iy)
    for (std::int64_t ix = 0; ix < f.cells_per_axis(); ++ix) {
      auto c = f.cell_center(ix, iy);
      double best = 0.0;
      for (int level = level_min; level <= f.resolution(); ++level) {
        GridCube gc = grid_cube_at(g, level, c);
        Cube cube = realize(gc);
        best = std::max(best, integrate(absf, cube) / cube.volume_units());
      }
      out.set(ix, iy, best);
    }
  return out;
}

}  // namespace ref

}  // namespace maxdual
