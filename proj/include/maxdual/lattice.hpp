#pragma once

#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "maxdual/geometry.hpp"

namespace maxdual {

// Piecewise-constant function on the uniform binary lattice over the
// computational box [-1,2)^n: 3*2^m cells of side 2^-m per axis, extension
// by zero outside the box.  Values are stored row-major (x fastest).
class LatticeFunction {
 public:
  LatticeFunction(int n, int m, double fill = 0.0, bool nonnegative = false);

  int dim() const { return n_; }
  int resolution() const { return m_; }
  int cells_per_axis() const { return cells_; }
  std::size_t size() const { return values_.size(); }
  const Box& box() const { return box_; }
  Tick cell_side() const { return cell_side_; }
  double cell_side_units() const { return tick_to_unit(cell_side_); }
  double cell_volume_units() const;
  bool nonnegative() const { return nonneg_; }

  double operator[](std::size_t flat) const { return values_[flat]; }
  double& operator[](std::size_t flat) { return values_[flat]; }
  double at(std::int64_t ix, std::int64_t iy = 0) const;
  void set(std::int64_t ix, std::int64_t iy, double v);
  const std::vector<double>& values() const { return values_; }
  std::vector<double>& values() { return values_; }

  std::size_t flat_index(std::int64_t ix, std::int64_t iy = 0) const;
  std::array<Tick, 2> cell_corner(std::int64_t ix, std::int64_t iy = 0) const;
  std::array<Tick, 2> cell_center(std::int64_t ix, std::int64_t iy = 0) const;
  std::array<double, 2> cell_center_units(std::int64_t ix, std::int64_t iy = 0) const;
  // Cell containing a tick point, or false if outside the box.
  bool locate(const std::array<Tick, 2>& p, std::int64_t& ix, std::int64_t& iy) const;
  // Value at a tick point (zero outside the box).
  double value_at(const std::array<Tick, 2>& p) const;

  // Marks the function nonnegative after checking the values.
  void set_nonnegative_flag();
  void validate() const;  // all values finite; >= 0 if flagged nonnegative

  // Fill from a callback on cell centers (unit coordinates).
  void fill_from(const std::function<double(const std::array<double, 2>&)>& fn);

  LatticeFunction abs() const;
  LatticeFunction scaled(double c) const;
  LatticeFunction cellwise_product(const LatticeFunction& g) const;

 private:
  int n_, m_, cells_;
  Box box_;
  Tick cell_side_;
  std::vector<double> values_;
  bool nonneg_;
};

// Exact integral of f over region (clipped to the box): sum over cells of
// value * overlap volume, accumulated in lexicographic cell order.
double integrate(const LatticeFunction& f, const Box& region);
double integrate(const LatticeFunction& f, const Cube& q);

// integrate / volume; rejects empty regions.
double average(const LatticeFunction& f, const Box& region);
double average(const LatticeFunction& f, const Cube& q);

// Exact integral of the cellwise product f*g over the whole box.
double integrate_product(const LatticeFunction& f, const LatticeFunction& g);

// JSON / CSV serialization of lattice functions.
std::string to_json(const LatticeFunction& f);
LatticeFunction lattice_from_json(const std::string& text);
void write_csv(const LatticeFunction& f, std::ostream& out);

}  // namespace maxdual
