#include "maxdual/lattice.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <stdexcept>

#include <json.hpp>

namespace maxdual {

LatticeFunction::LatticeFunction(int n, int m, double fill, bool nonnegative)
    : n_(n), m_(m), box_(computational_box(n)), nonneg_(nonnegative) {
  if (m < 0 || m > 30) throw std::invalid_argument("resolution level out of range");
  cells_ = 3 << m;
  cell_side_ = box_.len[0] / cells_;  // = 3 * 2^(kTickShift - m), exact
  std::size_t total = static_cast<std::size_t>(cells_);
  if (n == 2) total *= static_cast<std::size_t>(cells_);
  values_.assign(total, fill);
  if (nonneg_ && fill < 0) throw std::invalid_argument("negative fill for nonnegative function");
}

double LatticeFunction::cell_volume_units() const {
  double h = cell_side_units();
  return n_ == 2 ? h * h : h;
}

std::size_t LatticeFunction::flat_index(std::int64_t ix, std::int64_t iy) const {
  return static_cast<std::size_t>(iy) * cells_ + static_cast<std::size_t>(ix);
}

double LatticeFunction::at(std::int64_t ix, std::int64_t iy) const {
  return values_[flat_index(ix, iy)];
}

void LatticeFunction::set(std::int64_t ix, std::int64_t iy, double v) {
  values_[flat_index(ix, iy)] = v;
}

std::array<Tick, 2> LatticeFunction::cell_corner(std::int64_t ix, std::int64_t iy) const {
  std::array<Tick, 2> c{box_.lo[0] + ix * cell_side_, 0};
  if (n_ == 2) c[1] = box_.lo[1] + iy * cell_side_;
  return c;
}

std::array<Tick, 2> LatticeFunction::cell_center(std::int64_t ix, std::int64_t iy) const {
  auto c = cell_corner(ix, iy);
  c[0] += cell_side_ / 2;
  if (n_ == 2) c[1] += cell_side_ / 2;
  return c;
}

std::array<double, 2> LatticeFunction::cell_center_units(std::int64_t ix, std::int64_t iy) const {
  auto c = cell_center(ix, iy);
  return {tick_to_unit(c[0]), n_ == 2 ? tick_to_unit(c[1]) : 0.0};
}

bool LatticeFunction::locate(const std::array<Tick, 2>& p, std::int64_t& ix, std::int64_t& iy) const {
  ix = iy = 0;
  for (int a = 0; a < n_; ++a) {
    Tick off = p[a] - box_.lo[a];
    if (off < 0 || off >= box_.len[a]) return false;
    std::int64_t i = off / cell_side_;
    if (a == 0) ix = i; else iy = i;
  }
  return true;
}

double LatticeFunction::value_at(const std::array<Tick, 2>& p) const {
  std::int64_t ix, iy;
  if (!locate(p, ix, iy)) return 0.0;
  return at(ix, iy);
}

void LatticeFunction::set_nonnegative_flag() {
  for (double v : values_)
    if (v < 0) throw std::invalid_argument("nonnegative flag on function with negative values");
  nonneg_ = true;
}

void LatticeFunction::validate() const {
  for (double v : values_) {
    if (!std::isfinite(v)) throw std::invalid_argument("non-finite lattice value");
    if (nonneg_ && v < 0) throw std::invalid_argument("negative value in nonnegative function");
  }
}

void LatticeFunction::fill_from(const std::function<double(const std::array<double, 2>&)>& fn) {
  std::int64_t ny = n_ == 2 ? cells_ : 1;
  for (std::int64_t iy = 0; iy < ny; ++iy)
    for (std::int64_t ix = 0; ix < cells_; ++ix)
      values_[flat_index(ix, iy)] = fn(cell_center_units(ix, iy));
}

LatticeFunction LatticeFunction::abs() const {
  LatticeFunction g(n_, m_, 0.0, true);
  for (std::size_t i = 0; i < values_.size(); ++i) g.values_[i] = std::fabs(values_[i]);
  return g;
}

LatticeFunction LatticeFunction::scaled(double c) const {
  LatticeFunction g(n_, m_, 0.0, nonneg_ && c >= 0);
  for (std::size_t i = 0; i < values_.size(); ++i) g.values_[i] = c * values_[i];
  return g;
}

LatticeFunction LatticeFunction::cellwise_product(const LatticeFunction& g) const {
  if (g.n_ != n_ || g.m_ != m_) throw std::invalid_argument("lattice mismatch in product");
  LatticeFunction r(n_, m_, 0.0, nonneg_ && g.nonneg_);
  for (std::size_t i = 0; i < values_.size(); ++i) r.values_[i] = values_[i] * g.values_[i];
  return r;
}

namespace {

// Per-axis overlaps of [lo, lo+len) with the cells it meets.
struct AxisOverlap {
  std::int64_t first = 0;
  std::vector<Tick> ov;  // overlap ticks per cell starting at `first`
};

AxisOverlap axis_overlap(Tick box_lo, Tick box_len, Tick cell, Tick lo, Tick len) {
  AxisOverlap r;
  Tick hi = lo + len;
  lo = std::max(lo, box_lo);
  hi = std::min(hi, box_lo + box_len);
  if (hi <= lo) return r;
  r.first = (lo - box_lo) / cell;
  std::int64_t last = (hi - 1 - box_lo) / cell;
  r.ov.reserve(static_cast<std::size_t>(last - r.first + 1));
  for (std::int64_t i = r.first; i <= last; ++i) {
    Tick c0 = box_lo + i * cell;
    Tick c1 = c0 + cell;
    r.ov.push_back(std::min(hi, c1) - std::max(lo, c0));
  }
  return r;
}

}  // namespace

double integrate(const LatticeFunction& f, const Box& region) {
  const Box& b = f.box();
  AxisOverlap ox = axis_overlap(b.lo[0], b.len[0], f.cell_side(), region.lo[0], region.len[0]);
  if (ox.ov.empty()) return 0.0;
  double inv = 1.0 / static_cast<double>(kTickDen);
  if (f.dim() == 1) {
    double acc = 0.0;
    for (std::size_t k = 0; k < ox.ov.size(); ++k)
      acc += f.at(ox.first + static_cast<std::int64_t>(k)) * static_cast<double>(ox.ov[k]);
    return acc * inv;
  }
  AxisOverlap oy = axis_overlap(b.lo[1], b.len[1], f.cell_side(), region.lo[1], region.len[1]);
  if (oy.ov.empty()) return 0.0;
  double acc = 0.0;
  for (std::size_t ky = 0; ky < oy.ov.size(); ++ky) {
    double row = 0.0;
    std::int64_t iy = oy.first + static_cast<std::int64_t>(ky);
    for (std::size_t kx = 0; kx < ox.ov.size(); ++kx)
      row += f.at(ox.first + static_cast<std::int64_t>(kx), iy) * static_cast<double>(ox.ov[kx]);
    acc += row * static_cast<double>(oy.ov[ky]);
  }
  return acc * inv * inv;
}

double integrate(const LatticeFunction& f, const Cube& q) { return integrate(f, q.box()); }

double average(const LatticeFunction& f, const Box& region) {
  double vol = region.volume_units();
  if (!(vol > 0)) throw std::invalid_argument("average over empty region");
  return integrate(f, region) / vol;
}

double average(const LatticeFunction& f, const Cube& q) {
  if (q.side <= 0) throw std::invalid_argument("average over degenerate cube");
  return integrate(f, q.box()) / q.volume_units();
}

double integrate_product(const LatticeFunction& f, const LatticeFunction& g) {
  if (f.dim() != g.dim() || f.resolution() != g.resolution())
    throw std::invalid_argument("lattice mismatch in integrate_product");
  double acc = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) acc += f[i] * g[i];
  return acc * f.cell_volume_units();
}

std::string to_json(const LatticeFunction& f) {
  nlohmann::ordered_json j;
  j["n"] = f.dim();
  j["m"] = f.resolution();
  j["box"] = {{"lo", std::vector<double>(f.dim(), -1.0)}, {"side", 3.0}};
  j["values"] = f.values();
  j["nonnegative"] = f.nonnegative();
  return j.dump();
}

LatticeFunction lattice_from_json(const std::string& text) {
  auto j = nlohmann::json::parse(text);
  LatticeFunction f(j.at("n").get<int>(), j.at("m").get<int>(), 0.0, false);
  auto vals = j.at("values").get<std::vector<double>>();
  if (vals.size() != f.size()) throw std::invalid_argument("value count mismatch in lattice JSON");
  f.values() = vals;
  if (j.value("nonnegative", false)) f.set_nonnegative_flag();
  f.validate();
  return f;
}

void write_csv(const LatticeFunction& f, std::ostream& out) {
  if (f.dim() == 1) {
    out << "ix,value\n";
    for (std::int64_t ix = 0; ix < f.cells_per_axis(); ++ix) {
      char buf[40];
      std::snprintf(buf, sizeof buf, "%.17g", f.at(ix));
      out << ix << "," << buf << "\n";
    }
  } else {
    out << "ix,iy,value\n";
    for (std::int64_t iy = 0; iy < f.cells_per_axis(); ++iy)
      for (std::int64_t ix = 0; ix < f.cells_per_axis(); ++ix) {
        char buf[40];
        std::snprintf(buf, sizeof buf, "%.17g", f.at(ix, iy));
        out << ix << "," << iy << "," << buf << "\n";
      }
  }
}

}  // namespace maxdual
