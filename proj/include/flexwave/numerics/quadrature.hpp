#pragma once

#include <functional>
#include <span>

namespace flexwave::numerics {

using ScalarFn = std::function<double(double)>;

struct QuadratureTol {
  double abs = 1e-12;
  double rel = 1e-10;
};

// Recursive adaptive Simpson rule with Richardson correction.
double adaptive_simpson(const ScalarFn& f, double a, double b,
                        QuadratureTol tol = {}, int max_depth = 50);

// Globally adaptive 7/15-point Gauss-Kronrod. Never evaluates f at the
// interval endpoints, so integrable endpoint singularities are tolerated.
double gauss_kronrod(const ScalarFn& f, double a, double b,
                     QuadratureTol tol = {1e-14, 1e-13},
                     int max_intervals = 2000);

// Composite Simpson on uniformly spaced samples. An even number of
// intervals uses plain Simpson; an odd number closes with the 3/8 rule.
double simpson_samples(std::span<const double> y, double h);

// Trapezoid weights for n uniformly spaced nodes with spacing h.
double trapezoid_samples(std::span<const double> y, double h);

}  // namespace flexwave::numerics
