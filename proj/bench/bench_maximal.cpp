// Benchmark of the maximal-operator kernels against the serial reference
// implementations, with a cross-check that both produce the same values.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <vector>

#include "maxdual/maximal.hpp"
#include "maxdual/rng.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

using namespace maxdual;

namespace {

LatticeFunction random_support(int n, int m, std::uint64_t seed) {
  LatticeFunction f(n, m, 0.0, true);
  Rng rng(seed);
  Box supp = support_box(n);
  std::int64_t s0 = (supp.lo[0] - f.box().lo[0]) / f.cell_side();
  std::int64_t count = supp.len[0] / f.cell_side();
  std::int64_t ny = n == 2 ? f.cells_per_axis() : 1;
  for (std::int64_t iy = 0; iy < ny; ++iy)
    for (std::int64_t ix = 0; ix < f.cells_per_axis(); ++ix) {
      bool in = ix >= s0 && ix < s0 + count;
      if (n == 2) in = in && iy >= s0 && iy < s0 + count;
      if (in) f.set(ix, iy, rng.uniform());
    }
  return f;
}

template <typename Fn>
double time_ms(Fn&& fn, int reps) {
  auto t0 = std::chrono::steady_clock::now();
  for (int r = 0; r < reps; ++r) fn();
  auto t1 = std::chrono::steady_clock::now();
  return std::chrono::duration<double, std::milli>(t1 - t0).count() / reps;
}

double max_diff(const LatticeFunction& a, const LatticeFunction& b) {
  double worst = 0;
  for (std::size_t i = 0; i < a.size(); ++i) worst = std::max(worst, std::fabs(a[i] - b[i]));
  return worst;
}

}  // namespace

int main() {
#ifdef _OPENMP
  std::printf("threads: %d\n", omp_get_max_threads());
#else
  std::printf("threads: 1 (no OpenMP)\n");
#endif
  std::printf("%-22s %12s %12s %9s %10s\n", "case", "kernel ms", "reference ms", "speedup", "max diff");

  struct Case {
    int n, m, reps_fast, reps_slow;
  };
  for (const Case& c : {Case{1, 8, 20, 1}, Case{1, 10, 5, 0}, Case{2, 4, 5, 1}, Case{2, 6, 2, 0}}) {
    LatticeFunction f = random_support(c.n, c.m, 42);
    LatticeFunction fast = maximal(f, MaximalKind::full());
    double t_fast = time_ms([&] { fast = maximal(f, MaximalKind::full()); }, c.reps_fast);
    char label[64];
    std::snprintf(label, sizeof label, "full n=%d m=%d", c.n, c.m);
    if (c.reps_slow > 0) {
      LatticeFunction slow = ref::maximal_full(f);
      double t_slow = time_ms([&] { slow = ref::maximal_full(f); }, c.reps_slow);
      std::printf("%-22s %12.3f %12.3f %8.1fx %10.2e\n", label, t_fast, t_slow,
                  t_slow / t_fast, max_diff(fast, slow));
    } else {
      std::printf("%-22s %12.3f %12s %9s %10s\n", label, t_fast, "-", "-", "-");
    }
  }

  for (int n : {1, 2}) {
    int m = n == 1 ? 10 : 6;
    LatticeFunction f = random_support(n, m, 43);
    ShiftedGrid g{n, {1, n == 2 ? 2 : 0}};
    LatticeFunction fast = maximal(f, MaximalKind::grid_kind(g));
    double t_fast = time_ms([&] { fast = maximal(f, MaximalKind::grid_kind(g)); }, 10);
    LatticeFunction slow = ref::maximal_grid(f, g, kGridMaximalTopLevel);
    double t_slow = time_ms([&] { slow = ref::maximal_grid(f, g, kGridMaximalTopLevel); }, 2);
    char label[64];
    std::snprintf(label, sizeof label, "grid n=%d m=%d", n, m);
    std::printf("%-22s %12.3f %12.3f %8.1fx %10.2e\n", label, t_fast, t_slow, t_slow / t_fast,
                max_diff(fast, slow));
  }
  return 0;
}
