#include <doctest.h>

#include <cmath>

#include "maxdual/czsparse.hpp"
#include "maxdual/presets.hpp"
#include "maxdual/rng.hpp"
#include "oracles.hpp"

using namespace maxdual;

namespace {

LatticeFunction random_support(int n, int m, std::uint64_t seed) {
  LatticeFunction f(n, m, 0.0, true);
  Rng rng(seed);
  f.fill_from([&](const std::array<double, 2>& x) {
    bool in = x[0] >= 0 && x[0] < 1 && (n == 1 || (x[1] >= 0 && x[1] < 1));
    return in ? rng.uniform() : 0.0;
  });
  return f;
}

// Independent verification of a decomposition level: every reported cube
// exceeds the threshold, its parent does not, cubes are disjoint, and the
// union matches { M > threshold } at cell centers.
void verify_level(const CZDecomposition& cz, int k, const LatticeFunction& f) {
  LatticeFunction absf = f.abs();
  double thr = cz.threshold(k);
  const auto& cubes = cz.cubes_at(k);
  for (std::size_t i = 0; i < cubes.size(); ++i) {
    double avg = integrate(absf, cubes[i].cube) / cubes[i].cube.volume_units();
    CHECK(avg > thr);
    REQUIRE(cubes[i].addr.has_value());
    Cube par = realize(parent(*cubes[i].addr));
    CHECK(integrate(absf, par) / par.volume_units() <= thr * (1 + 1e-12));
    for (std::size_t j = i + 1; j < cubes.size(); ++j) {
      bool apart = false;
      for (int a = 0; a < cubes[i].cube.n; ++a)
        if (cubes[i].cube.lo[a] + cubes[i].cube.side <= cubes[j].cube.lo[a] ||
            cubes[j].cube.lo[a] + cubes[j].cube.side <= cubes[i].cube.lo[a])
          apart = true;
      CHECK(apart);
    }
  }
  // union equals the superlevel set of the family maximal function
  LatticeFunction mg = grid_maximal_from_table(f, *cz.table);
  std::int64_t ny = f.dim() == 2 ? f.cells_per_axis() : 1;
  for (std::int64_t iy = 0; iy < ny; ++iy)
    for (std::int64_t ix = 0; ix < f.cells_per_axis(); ++ix) {
      auto c = f.cell_center(ix, iy);
      bool inside = false;
      for (const auto& q : cubes)
        if (q.cube.contains_point(c)) inside = true;
      bool super = mg.at(ix, iy) > thr;
      CHECK(inside == super);
    }
}

}  // namespace

TEST_CASE("stopping decomposition of a small block indicator") {
  int m = 8;
  LatticeFunction f = function_preset("block:1,0,0.125", 1, m);
  ShiftedGrid g0{1, {0, 0}};
  CZDecomposition cz = cz_decompose(f, g0, 2.0);
  CHECK(cz.k_hi == -1);
  CHECK(cz.k_lo == -5);
  for (int k = cz.k_lo; k <= cz.k_hi; ++k) {
    const auto& cubes = cz.cubes_at(k);
    REQUIRE(cubes.size() == 1);
    // one dyadic interval [0, 2^{-(k+4)}) per level
    CHECK(cubes[0].cube.lo[0] == 0);
    CHECK(cubes[0].cube.side == grid_side(k + 4));
    verify_level(cz, k, f);
  }
  CHECK(check_level_shrinkage(cz).pass);
}

TEST_CASE("constant function: every enumerated level set is the whole box") {
  int m = 6;
  LatticeFunction f(1, m, 1.0, true);
  CZDecomposition cz = cz_decompose(f, ShiftedGrid{1, {0, 0}}, 2.0);
  CHECK(cz.k_hi == -1);  // thresholds at or above the sup select nothing
  Box box = computational_box(1);
  for (int k = cz.k_lo; k <= cz.k_hi; ++k) {
    double covered = 0;
    for (const auto& q : cz.cubes_at(k)) covered += intersect(q.cube.box(), box).volume_units();
    CHECK(covered == doctest::Approx(box.volume_units()).epsilon(1e-12));
  }
}

TEST_CASE("degenerate inputs") {
  int m = 5;
  LatticeFunction zero(1, m);
  CZDecomposition cz = cz_decompose(zero, ShiftedGrid{1, {0, 0}}, 2.0);
  CHECK(cz.empty());
  CHECK_THROWS(cz_decompose(random_support(1, m, 1), ShiftedGrid{1, {0, 0}}, 1.0));
  CHECK_THROWS(cz_decompose_local(zero, Cube{1, {0, 0}, kTickDen}, 2.0));
}

TEST_CASE("level shrinkage: randomized suite over both gammas") {
  int m = 8;
  Rng rng(3);
  auto grids = build_shifted_grids(1);
  for (int t = 0; t < 50; ++t) {
    LatticeFunction f = random_support(1, m, 600 + t);
    for (double gamma : {2.0, 4.0}) {
      CZDecomposition cz = cz_decompose(f, grids[rng.below(grids.size())], gamma);
      CHECK(check_level_shrinkage(cz, 6).pass);
    }
  }
  LatticeFunction f2 = random_support(2, 4, 9);
  CZDecomposition cz2 = cz_decompose(f2, ShiftedGrid{2, {1, 2}}, 8.0);
  CHECK(check_level_shrinkage(cz2, 4).pass);
}

TEST_CASE("local variant on the support cube") {
  int m = 7;
  LatticeFunction f = random_support(1, m, 4);
  Cube q0{1, {0, 0}, kTickDen};
  CZDecomposition cz = cz_decompose_local(f, q0, 2.0);
  CHECK(cz.local);
  CHECK(cz.k_lo == 1);
  CHECK(cz.base_average > 0);
  for (int k = cz.k_lo; k <= cz.k_hi; ++k) {
    for (const auto& q : cz.cubes_at(k)) {
      CHECK(q0.contains(q.cube));
      CHECK(q.avg > cz.threshold(k));
    }
  }
  CHECK(check_level_shrinkage(cz, 4).pass);
}

TEST_CASE("sparse family from a constant is trivially dominated") {
  int m = 5;
  LatticeFunction f(1, m, 1.0, true);
  SparseResult sr = sparse_from_maximal(f, ShiftedGrid{1, {0, 0}}, 0.5);
  CHECK(sr.certificate.pass);
  CHECK(verify_sparse_family(sr.family).pass);
}

TEST_CASE("single-cell spike produces a chain of ancestors") {
  int m = 8;
  LatticeFunction f(1, m, 0.0, true);
  std::int64_t i0 = (0 - f.box().lo[0]) / f.cell_side();
  f.set(i0, 0, 1.0 / f.cell_side_units());
  SparseResult sr = sparse_from_maximal(f, ShiftedGrid{1, {0, 0}}, 0.5);
  CHECK(sr.certificate.pass);
  CHECK(verify_sparse_family(sr.family).pass);
  // every entry's cube contains the spike cell, so the cubes are nested
  Cube spike{1, {0, 0}, f.cell_side()};
  for (const auto& e : sr.family.entries) CHECK(realize(e.q).contains(spike));
}

TEST_CASE("sparse domination: randomized suite over sparsity parameters") {
  int m = 8;
  Rng rng(8);
  auto grids = build_shifted_grids(1);
  for (double eta : {0.25, 0.5, 0.75}) {
    for (int t = 0; t < 50; ++t) {
      LatticeFunction f = random_support(1, m, 900 + t);
      SparseResult sr = sparse_from_maximal(f, grids[rng.below(grids.size())], eta);
      CHECK(sr.certificate.pass);
      CHECK(verify_sparse_family(sr.family).pass);
    }
  }
  CHECK_THROWS(sparse_from_maximal(random_support(1, m, 1), ShiftedGrid{1, {0, 0}}, 1.0));
}

TEST_CASE("sparse operator: indicator examples and evaluation oracle") {
  int m = 6;
  // single entry covering [0, 1/2) with E = Q
  SparseFamily s;
  s.eta = 1.0;
  s.grid = ShiftedGrid{1, {0, 0}};
  SparseEntry e;
  e.q = GridCube{s.grid, 1, {0, 0}};
  e.volume = 0.5;
  e.e_volume = 0.5;
  s.entries.push_back(e);

  LatticeFunction one(1, m, 1.0, true);
  LatticeFunction out = sparse_operator(s, one);
  Cube q = realize(e.q);
  for (std::int64_t i = 0; i < out.cells_per_axis(); ++i) {
    double expect = q.contains_point(one.cell_center(i)) ? 1.0 : 0.0;
    CHECK(out[static_cast<std::size_t>(i)] == doctest::Approx(expect).epsilon(1e-12));
  }
  LatticeFunction adj = adjoint_sparse_operator(s, one);
  for (std::int64_t i = 0; i < adj.cells_per_axis(); ++i) {
    double expect = q.contains_point(one.cell_center(i)) ? 1.0 : 0.0;
    CHECK(adj[static_cast<std::size_t>(i)] == doctest::Approx(expect).epsilon(1e-12));
  }

  // two disjoint entries: scaled indicators add up
  SparseEntry e2;
  e2.q = GridCube{s.grid, 1, {1, 0}};  // [1/2, 1)
  e2.volume = 0.5;
  e2.e_volume = 0.5;
  s.entries.push_back(e2);
  LatticeFunction f = random_support(1, m, 55);
  LatticeFunction out2 = sparse_operator(s, f);
  // independent evaluation: per-center membership sum
  for (std::int64_t i = 0; i < out2.cells_per_axis(); ++i) {
    auto c = f.cell_center(i);
    double expect = 0;
    for (const auto& entry : s.entries) {
      Cube qq = realize(entry.q);
      if (qq.contains_point(c)) expect += integrate(f, qq) / qq.volume_units();
    }
    CHECK(out2[static_cast<std::size_t>(i)] == doctest::Approx(expect).epsilon(1e-12));
  }
}

TEST_CASE("entries with empty interior set contribute nothing") {
  int m = 6;
  SparseFamily s;
  s.eta = 0.5;
  s.grid = ShiftedGrid{1, {0, 0}};
  SparseEntry e;
  e.q = GridCube{s.grid, 1, {0, 0}};
  // remove both children: E(Q) is empty
  for (const GridCube& ch : children(e.q)) e.removed.push_back(ch);
  e.volume = 0.5;
  e.e_volume = 0.0;
  s.entries.push_back(e);
  LatticeFunction one(1, m, 1.0, true);
  LatticeFunction out = sparse_operator(s, one);
  for (std::size_t i = 0; i < out.size(); ++i) CHECK(out[i] == doctest::Approx(0.0));
  LatticeFunction adj = adjoint_sparse_operator(s, one);
  for (std::size_t i = 0; i < adj.size(); ++i) CHECK(std::fabs(adj[i]) <= 1e-15);
}

TEST_CASE("pairing identity between the operator and its adjoint") {
  int m = 7;
  Rng rng(12);
  auto grids = build_shifted_grids(1);
  double worst = 0;
  for (int t = 0; t < 100; ++t) {
    LatticeFunction gen = random_support(1, m, 1300 + t);
    SparseResult sr = sparse_from_maximal(gen, grids[rng.below(grids.size())], 0.5);
    LatticeFunction f = random_support(1, m, 1500 + t);
    LatticeFunction g = random_support(1, m, 1700 + t);
    double lhs = pairing_with_sparse(sr.family, f, g);
    double rhs = pairing_with_adjoint(sr.family, f, g);
    double scale = std::max({1.0, std::fabs(lhs), std::fabs(rhs)});
    worst = std::max(worst, std::fabs(lhs - rhs) / scale);
  }
  CHECK(worst <= 1e-10);
}

TEST_CASE("level sets telescope exactly on the grid mesh") {
  int m = 7;
  Rng rng(2);
  auto grids = build_shifted_grids(1);
  for (int t = 0; t < 10; ++t) {
    LatticeFunction f = random_support(1, m, 2100 + t);
    CZDecomposition cz = cz_decompose(f, grids[rng.below(grids.size())], 2.0);
    CHECK(check_level_telescoping(cz, 3).pass);
  }
}

TEST_CASE("sparse family serialization carries the schema fields") {
  int m = 6;
  LatticeFunction f = random_support(1, m, 31);
  SparseResult sr = sparse_from_maximal(f, ShiftedGrid{1, {1, 0}}, 0.5);
  auto j = nlohmann::json::parse(to_json(sr.family));
  CHECK(j.at("eta").get<double>() == 0.5);
  CHECK(j.at("grid_shift")[0].get<int>() == 1);
  REQUIRE(!j.at("entries").empty());
  const auto& first = j.at("entries")[0];
  CHECK(first.contains("level"));
  CHECK(first.contains("index"));
  CHECK(first.contains("E"));
  CHECK(first.contains("E_volume"));
}
