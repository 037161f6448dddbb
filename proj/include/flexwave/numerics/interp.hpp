#pragma once

#include <span>
#include <vector>

namespace flexwave::numerics {

// Piecewise cubic Hermite interpolant on strictly increasing nodes.
class CubicHermite {
 public:
  CubicHermite() = default;
  CubicHermite(std::vector<double> x, std::vector<double> y,
               std::vector<double> dydx);

  double operator()(double t) const;
  double derivative(double t) const;
  // Exact integral of the interpolant over [x.front(), t].
  double integral_to(double t) const;

  std::span<const double> nodes() const { return x_; }
  std::span<const double> values() const { return y_; }
  std::span<const double> slopes() const { return d_; }

 private:
  std::size_t interval(double t) const;

  std::vector<double> x_, y_, d_;
  std::vector<double> cumulative_;  // integral from x.front() to x[i]
};

// Monotone piecewise cubic (Fritsch-Carlson slopes, PCHIP end conditions).
// The interpolant is C^1 and preserves monotonicity of the data.
CubicHermite make_pchip(std::vector<double> x, std::vector<double> y);

}  // namespace flexwave::numerics
