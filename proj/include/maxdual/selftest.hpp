#pragma once

#include <vector>

#include "maxdual/config.hpp"
#include "maxdual/report.hpp"

namespace maxdual {

// Condensed invariant suite over all modules at the configured (n, m, seed);
// deterministic for a fixed seed.  Returns one report per check.
std::vector<ProbeReport> run_selftest(const ExperimentConfig& cfg);

}  // namespace maxdual
