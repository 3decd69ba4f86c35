#include "maxdual/geometry.hpp"

#include <algorithm>
#include <cassert>
#include <cstring>
#include <stdexcept>

namespace maxdual {

bool Box::empty() const {
  for (int a = 0; a < n; ++a)
    if (len[a] <= 0) return true;
  return false;
}

double Box::volume_units() const {
  double v = 1.0;
  for (int a = 0; a < n; ++a) v *= tick_to_unit(len[a]);
  return v;
}

Box computational_box(int n) {
  if (n != 1 && n != 2) throw std::invalid_argument("dimension must be 1 or 2");
  Box b;
  b.n = n;
  for (int a = 0; a < n; ++a) {
    b.lo[a] = -kTickDen;
    b.len[a] = 3 * kTickDen;
  }
  return b;
}

Box support_box(int n) {
  if (n != 1 && n != 2) throw std::invalid_argument("dimension must be 1 or 2");
  Box b;
  b.n = n;
  for (int a = 0; a < n; ++a) {
    b.lo[a] = 0;
    b.len[a] = kTickDen;
  }
  return b;
}

Box intersect(const Box& a, const Box& b) {
  Box r;
  r.n = a.n;
  for (int ax = 0; ax < a.n; ++ax) {
    Tick lo = std::max(a.lo[ax], b.lo[ax]);
    Tick hi = std::min(a.hi(ax), b.hi(ax));
    r.lo[ax] = lo;
    r.len[ax] = std::max<Tick>(0, hi - lo);
  }
  return r;
}

bool box_contains(const Box& outer, const Box& inner) {
  for (int a = 0; a < outer.n; ++a) {
    if (inner.lo[a] < outer.lo[a]) return false;
    if (inner.hi(a) > outer.hi(a)) return false;
  }
  return true;
}

double Cube::volume_units() const {
  double s = side_units();
  return n == 2 ? s * s : s;
}

bool Cube::contains(const Cube& inner) const {
  for (int a = 0; a < n; ++a) {
    if (inner.lo[a] < lo[a]) return false;
    if (inner.lo[a] + inner.side > lo[a] + side) return false;
  }
  return true;
}

bool Cube::contains_point(const std::array<Tick, 2>& p) const {
  for (int a = 0; a < n; ++a) {
    if (p[a] < lo[a] || p[a] >= lo[a] + side) return false;
  }
  return true;
}

std::string ShiftedGrid::label() const {
  static const char* names[3] = {"0", "1/3", "2/3"};
  std::string out = "a=";
  out += names[s[0]];
  if (n == 2) {
    out += ",";
    out += names[s[1]];
  }
  return out;
}

std::vector<ShiftedGrid> build_shifted_grids(int n) {
  if (n != 1 && n != 2) throw std::invalid_argument("dimension must be 1 or 2");
  std::vector<ShiftedGrid> grids;
  if (n == 1) {
    for (int s = 0; s < 3; ++s) grids.push_back(ShiftedGrid{1, {s, 0}});
  } else {
    for (int s0 = 0; s0 < 3; ++s0)
      for (int s1 = 0; s1 < 3; ++s1) grids.push_back(ShiftedGrid{2, {s0, s1}});
  }
  return grids;
}

static int level_sign(int level) { return (level % 2 == 0) ? 1 : -1; }

Tick grid_side(int level) {
  if (level < kMinGridLevel || level > kMaxGridLevel)
    throw std::invalid_argument("grid level out of tick range");
  // side = 2^-level units = 3 * 2^(kTickShift - level) ticks
  return Tick(3) << (kTickShift - level);
}

Tick grid_corner(const ShiftedGrid& g, int axis, int level, std::int64_t j) {
  // corner = 2^-level (j + (-1)^level s/3) = (3j + (-1)^level s) * 2^(kTickShift-level)
  std::int64_t num = 3 * j + level_sign(level) * g.s[axis];
  return num << (kTickShift - level);
}

Cube realize(const GridCube& gc) {
  Cube c;
  c.n = gc.grid.n;
  c.side = grid_side(gc.level);
  for (int a = 0; a < c.n; ++a) c.lo[a] = grid_corner(gc.grid, a, gc.level, gc.idx[a]);
  return c;
}

std::int64_t grid_locate(const ShiftedGrid& g, int axis, int level, Tick x) {
  // largest j with corner(j) <= x; corner numerators step by 3 per index.
  Tick unit = Tick(1) << (kTickShift - level);
  std::int64_t num = x / unit - (x % unit < 0 ? 1 : 0);  // floor(x / unit)
  // solve 3j + sign*s <= num < 3(j+1) + sign*s
  std::int64_t shifted = num - level_sign(level) * g.s[axis];
  std::int64_t j = shifted / 3 - (shifted % 3 < 0 ? 1 : 0);
  assert(grid_corner(g, axis, level, j) <= x && x < grid_corner(g, axis, level, j + 1));
  return j;
}

GridCube grid_cube_at(const ShiftedGrid& g, int level, const std::array<Tick, 2>& p) {
  GridCube gc;
  gc.grid = g;
  gc.level = level;
  for (int a = 0; a < g.n; ++a) gc.idx[a] = grid_locate(g, a, level, p[a]);
  return gc;
}

static std::int64_t floor_div2(std::int64_t v) { return (v >> 1); }

GridCube parent(const GridCube& gc) {
  GridCube p;
  p.grid = gc.grid;
  p.level = gc.level - 1;
  int beta = level_sign(p.level);
  for (int a = 0; a < gc.grid.n; ++a) {
    p.idx[a] = floor_div2(gc.idx[a] - std::int64_t(beta) * gc.grid.s[a]);
  }
  return p;
}

std::vector<GridCube> children(const GridCube& gc) {
  std::vector<GridCube> out;
  int beta = level_sign(gc.level);
  int n = gc.grid.n;
  int count = (n == 2) ? 4 : 2;
  out.reserve(count);
  for (int bits = 0; bits < count; ++bits) {
    GridCube c;
    c.grid = gc.grid;
    c.level = gc.level + 1;
    for (int a = 0; a < n; ++a) {
      c.idx[a] = 2 * gc.idx[a] + std::int64_t(beta) * gc.grid.s[a] + ((bits >> a) & 1);
    }
    out.push_back(c);
  }
  return out;
}

CoverResult cover_cube(const Cube& q) {
  if (q.side <= 0) throw std::invalid_argument("cover_cube: empty cube");
  auto grids = build_shifted_grids(q.n);

  // A cube that is exactly a grid cube covers itself.
  for (int level = kMinGridLevel; level <= kMaxGridLevel; ++level) {
    if (grid_side(level) != q.side) continue;
    for (const auto& g : grids) {
      GridCube gc = grid_cube_at(g, level, q.lo);
      Cube c = realize(gc);
      if (c.lo == q.lo) return CoverResult{g, gc, c};
    }
    break;
  }

  // Smallest grid level whose side is >= 3 * side(q); a containing cube with
  // side < 6 * side(q) exists there because the union of the 3 corner sets
  // per axis has spacing side/3.
  int level = kMaxGridLevel;
  while (level > kMinGridLevel && grid_side(level) < 3 * q.side) --level;
  for (const auto& g : grids) {
    GridCube gc = grid_cube_at(g, level, q.lo);
    Cube c = realize(gc);
    if (c.contains(q)) return CoverResult{g, gc, c};
  }
  throw std::logic_error("cover_cube: no covering grid cube found (internal error)");
}

std::uint64_t fnv1a(std::uint64_t h, const void* data, std::size_t len) {
  const unsigned char* p = static_cast<const unsigned char*>(data);
  for (std::size_t i = 0; i < len; ++i) {
    h ^= p[i];
    h *= 1099511628211ULL;
  }
  return h;
}

}  // namespace maxdual
