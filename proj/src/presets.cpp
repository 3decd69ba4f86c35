#include "maxdual/presets.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

#include "maxdual/rng.hpp"

namespace maxdual {

namespace {

struct ParsedSpec {
  std::string name;
  std::vector<double> args;
};

ParsedSpec parse_spec(const std::string& spec) {
  ParsedSpec out;
  auto colon = spec.find(':');
  out.name = spec.substr(0, colon);
  if (colon != std::string::npos) {
    std::stringstream ss(spec.substr(colon + 1));
    std::string tok;
    while (std::getline(ss, tok, ',')) {
      try {
        out.args.push_back(std::stod(tok));
      } catch (...) {
        throw std::invalid_argument("bad preset argument in '" + spec + "'");
      }
    }
  }
  return out;
}

double arg(const ParsedSpec& s, std::size_t i, double fallback) {
  return i < s.args.size() ? s.args[i] : fallback;
}

double need(const ParsedSpec& s, std::size_t i) {
  if (i >= s.args.size()) throw std::invalid_argument("preset '" + s.name + "' missing argument");
  return s.args[i];
}

double dist_to(const std::array<double, 2>& x, double x0, int n) {
  double dx = x[0] - x0;
  double dy = n == 2 ? x[1] - x0 : 0.0;
  return std::sqrt(dx * dx + dy * dy);
}

}  // namespace

ExponentField exponent_preset(const std::string& spec, int n, int m) {
  ParsedSpec s = parse_spec(spec);
  LatticeFunction p(n, m);
  if (s.name == "const") {
    double q = need(s, 0);
    p.fill_from([&](const std::array<double, 2>&) { return q; });
  } else if (s.name == "affine") {
    // Affine in x1 over the support box, constant extension beyond it, so
    // the exponent bounds are controlled by the endpoint values.
    double a = need(s, 0), b = need(s, 1);
    p.fill_from([&](const std::array<double, 2>& x) {
      double t = std::clamp(x[0], 0.0, 1.0);
      return a + b * t;
    });
  } else if (s.name == "loghold") {
    double p0 = need(s, 0), a = need(s, 1), x0 = arg(s, 2, 0.0);
    p.fill_from([&](const std::array<double, 2>& x) {
      double d = dist_to(x, x0, n);
      return p0 + a / std::log(std::exp(1.0) + 1.0 / std::max(d, 1e-300));
    });
  } else {
    throw std::invalid_argument("unknown exponent preset '" + spec + "'");
  }
  return ExponentField(std::move(p));
}

WeightField weight_preset(const std::string& spec, int n, int m) {
  ParsedSpec s = parse_spec(spec);
  LatticeFunction w(n, m, 1.0, true);
  if (s.name == "const") {
    double c = need(s, 0);
    w.fill_from([&](const std::array<double, 2>&) { return c; });
  } else if (s.name == "power-weight") {
    double a = need(s, 0), x0 = arg(s, 1, 0.5);
    // Cell centers never coincide with x0 = 0.5 on this lattice, so the
    // sampled weight stays strictly positive for any exponent sign.
    w.fill_from([&](const std::array<double, 2>& x) { return std::pow(dist_to(x, x0, n), a); });
  } else {
    throw std::invalid_argument("unknown weight preset '" + spec + "'");
  }
  return WeightField(std::move(w));
}

LatticeFunction function_preset(const std::string& spec, int n, int m, std::uint64_t seed) {
  ParsedSpec s = parse_spec(spec);
  LatticeFunction f(n, m, 0.0, true);
  if (s.name == "const") {
    double c = need(s, 0);
    f.fill_from([&](const std::array<double, 2>& x) {
      bool in = x[0] >= 0 && x[0] < 1 && (n == 1 || (x[1] >= 0 && x[1] < 1));
      return in ? c : 0.0;
    });
  } else if (s.name == "block") {
    double c = need(s, 0), a = need(s, 1), b = need(s, 2);
    f.fill_from([&](const std::array<double, 2>& x) {
      bool in = x[0] >= a && x[0] < b && (n == 1 || (x[1] >= a && x[1] < b));
      return in ? c : 0.0;
    });
  } else if (s.name == "spike") {
    double x0 = need(s, 0);
    double cellvol = f.cell_volume_units();
    double h = f.cell_side_units();
    f.fill_from([&](const std::array<double, 2>& x) {
      bool in = x0 >= x[0] - h / 2 && x0 < x[0] + h / 2;
      if (n == 2) in = in && x0 >= x[1] - h / 2 && x0 < x[1] + h / 2;
      return in ? 1.0 / cellvol : 0.0;
    });
  } else if (s.name == "random") {
    double amp = arg(s, 0, 1.0);
    Rng rng(seed);
    f.fill_from([&](const std::array<double, 2>& x) {
      bool in = x[0] >= 0 && x[0] < 1 && (n == 1 || (x[1] >= 0 && x[1] < 1));
      return in ? amp * rng.uniform() : 0.0;
    });
  } else {
    throw std::invalid_argument("unknown function preset '" + spec + "'");
  }
  return f;
}

SpaceSpec space_preset(const std::string& p_spec, const std::string& w_spec, int n, int m) {
  return SpaceSpec::make(exponent_preset(p_spec, n, m), weight_preset(w_spec, n, m), p_spec, w_spec);
}

bool is_named_space(const std::string& id) {
  return id == "calibration" || id == "loghold" || id == "adversarial";
}

SpaceSpec named_space(const std::string& id, int n, int m) {
  if (id == "calibration") return space_preset("const:2", "const:1", n, m);
  if (id == "loghold") return space_preset("loghold:2,0.5", "power-weight:0.125", n, m);
  if (id == "adversarial") return space_preset("const:2", "power-weight:-0.9", n, m);
  throw std::invalid_argument("unknown space preset '" + id + "'");
}

}  // namespace maxdual
