#include <doctest.h>

#include <sstream>

#include "maxdual/lattice.hpp"
#include "maxdual/presets.hpp"
#include "maxdual/rng.hpp"
#include "oracles.hpp"

using namespace maxdual;

namespace {

Tick ut(double x) { return static_cast<Tick>(std::llround(x * static_cast<double>(kTickDen))); }

Box interval(double a, double b) { return Box{1, {ut(a), 0}, {ut(b) - ut(a), 0}}; }

LatticeFunction random_fn(int n, int m, std::uint64_t seed) {
  LatticeFunction f(n, m, 0.0, true);
  Rng rng(seed);
  for (std::size_t i = 0; i < f.size(); ++i) f[i] = rng.uniform();
  return f;
}

}  // namespace

TEST_CASE("lattice geometry basics") {
  LatticeFunction f(1, 4);
  CHECK(f.cells_per_axis() == 48);  // 3 * 2^4
  CHECK(f.cell_side_units() == doctest::Approx(1.0 / 16).epsilon(1e-15));
  CHECK(f.box().lo[0] == -kTickDen);
  LatticeFunction g(2, 3);
  CHECK(g.size() == 24u * 24u);
}

TEST_CASE("integrate: indicator examples") {
  int m = 6;
  LatticeFunction one = function_preset("block:1,0,1", 1, m);
  CHECK(integrate(one, interval(0, 1)) == doctest::Approx(1.0).epsilon(1e-14));

  LatticeFunction half = function_preset("block:1,0,0.5", 1, m);
  CHECK(integrate(half, interval(0.25, 0.75)) == doctest::Approx(0.25).epsilon(1e-14));
}

TEST_CASE("integrate matches the refined-lattice oracle") {
  LatticeFunction f = random_fn(1, 4, 99);
  Box b = interval(0.13, 0.77);
  double coarse = integrate(f, b);
  double fine = oracles::integrate_fine(f, b, 4);
  CHECK(std::fabs(coarse - fine) <= 1e-12);

  LatticeFunction f2 = random_fn(2, 3, 100);
  Box b2{2, {ut(0.13), ut(-0.41)}, {ut(0.64), ut(0.9)}};
  CHECK(std::fabs(integrate(f2, b2) - oracles::integrate_fine(f2, b2, 3)) <= 1e-12);
}

TEST_CASE("integrate clips to the computational box") {
  LatticeFunction one = function_preset("block:1,0,1", 1, 5);
  // region sticking out on both sides sees only the support mass
  CHECK(integrate(one, interval(-5.0, 5.0)) == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("integrate is additive and monotone") {
  Rng rng(7);
  LatticeFunction f = random_fn(1, 6, 1);
  for (int t = 0; t < 50; ++t) {
    double a = rng.uniform(-1.0, 1.9);
    double c = rng.uniform(a + 1e-6, 2.0);
    double b = rng.uniform(a, c);
    double whole = integrate(f, interval(a, c));
    double parts = integrate(f, interval(a, b)) + integrate(f, interval(b, c));
    CHECK(whole == doctest::Approx(parts).epsilon(1e-12));
  }
  LatticeFunction g = f;
  for (std::size_t i = 0; i < g.size(); ++i) g[i] += 0.25;
  CHECK(integrate(f, interval(-0.3, 1.7)) <= integrate(g, interval(-0.3, 1.7)));
}

TEST_CASE("average examples and degenerate region") {
  int m = 6;
  LatticeFunction one = function_preset("block:1,0,1", 1, m);
  CHECK(average(one, interval(0, 1)) == doctest::Approx(1.0));
  LatticeFunction half = function_preset("block:1,0,0.5", 1, m);
  CHECK(average(half, interval(0, 1)) == doctest::Approx(0.5));
  LatticeFunction f = random_fn(1, 6, 5);
  CHECK(average(f, interval(0.3, 0.4)) ==
        doctest::Approx(oracles::integrate_fine(f, interval(0.3, 0.4)) / 0.1).epsilon(1e-10));
  CHECK_THROWS(average(f, interval(0.5, 0.5)));
}

TEST_CASE("lattice function validation") {
  LatticeFunction f(1, 3);
  f[0] = -1.0;
  CHECK_THROWS(f.set_nonnegative_flag());
  f[0] = std::numeric_limits<double>::infinity();
  CHECK_THROWS(f.validate());
}

TEST_CASE("json round trip preserves values") {
  LatticeFunction f = random_fn(2, 2, 42);
  LatticeFunction g = lattice_from_json(to_json(f));
  REQUIRE(g.size() == f.size());
  for (std::size_t i = 0; i < f.size(); ++i) CHECK(g[i] == f[i]);
  CHECK(g.resolution() == f.resolution());
  CHECK(g.dim() == 2);
}

TEST_CASE("csv emits one row per cell") {
  LatticeFunction f = random_fn(1, 2, 3);
  std::ostringstream out;
  write_csv(f, out);
  std::string text = out.str();
  std::size_t rows = static_cast<std::size_t>(std::count(text.begin(), text.end(), '\n'));
  CHECK(rows == f.size() + 1);  // header + cells
}
