#pragma once

#include <functional>

namespace flexwave::numerics {

struct RootOptions {
  double x_rel_tol = 1e-13;
  double x_abs_tol = 0.0;
  int max_iter = 200;
};

struct RootResult {
  double x;
  double fx;
  int iterations;
};

// Brent's method on a bracket [a, b] with f(a), f(b) of opposite sign (or
// one of them zero). Throws NumericalError if the bracket is invalid.
RootResult brent(const std::function<double(double)>& f, double a, double b,
                 RootOptions opt = {});

// Same as brent() but reuses already computed endpoint values.
RootResult brent(const std::function<double(double)>& f, double a, double b,
                 double fa, double fb, RootOptions opt = {});

// Golden-section search for a maximum of a unimodal f on [a, b].
double golden_maximize(const std::function<double(double)>& f, double a,
                       double b, double x_tol = 1e-13, int max_iter = 200);

}  // namespace flexwave::numerics
