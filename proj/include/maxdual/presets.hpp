#pragma once

#include <string>

#include "maxdual/duallab.hpp"

namespace maxdual {

// Named field presets, addressable from configs and the CLI.
//
// Exponents:  const:q | affine:a,b (a + b x1, x1 clamped to the support box)
//             | loghold:p0,a[,x0]  (p0 + a / log(e + 1/|x - x0|))
// Weights:    const:c | power-weight:a[,x0]  (|x - x0|^a, x0 default 0.5)
// Functions:  const:c (c on the support box) | block:c,a,b (c chi_[a,b)^n)
//             | spike:x0 (unit-mass single cell at x0) | random:amplitude
ExponentField exponent_preset(const std::string& spec, int n, int m);
WeightField weight_preset(const std::string& spec, int n, int m);
LatticeFunction function_preset(const std::string& spec, int n, int m, std::uint64_t seed = 7);

SpaceSpec space_preset(const std::string& p_spec, const std::string& w_spec, int n, int m);

// Combined space ids: calibration | loghold | adversarial.
SpaceSpec named_space(const std::string& id, int n, int m);
bool is_named_space(const std::string& id);

}  // namespace maxdual
