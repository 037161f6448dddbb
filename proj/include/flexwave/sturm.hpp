#pragma once

#include <vector>

#include "flexwave/laminar.hpp"
#include "flexwave/numerics/ode.hpp"

namespace flexwave {

// Solution of lambda^2 (a^3 f')' - mu a f = 0 sampled on the laminar grid.
// Very stiff growth (large mu) is rescaled during integration: the true
// solution is the stored one times exp(log_scale).
struct ShootResult {
  std::vector<double> f;       // f(p_i)
  std::vector<double> fprime;  // f'(p_i)
  double f0 = 0.0;             // f(0)
  double fp0 = 0.0;            // f'(0)
  double lambda = 0.0;
  double mu = 0.0;
  double log_scale = 0.0;
};

struct BifurcationPoint {
  double C0 = 0.0;
  double lambda_star = 0.0;
  ShootResult f1_star;  // at (lambda_star, (2 pi)^2), normalised so f0 > 0
  int mode_k = 1;
};

inline constexpr numerics::OdeOptions kShootOptions{1e-12, 1e-10};

// Forward shot from the bed: f(p0) = 0, f'(p0) = 1.
ShootResult shoot_f1(const LaminarFlow& flow, double lambda, double mu);

// Backward shot from the surface: f(0) = lambda^4 a^3(0),
// f'(0) = g lambda^4 + alpha mu^2.
ShootResult shoot_f2(const LaminarFlow& flow, const PhysicalParams& params, double lambda,
                     double mu);

// W(lambda, mu) = (g lambda^4 + alpha mu^2) f1(0) - lambda^4 a^3(0) f1'(0).
// Returned unscaled; may overflow to +-inf for very large mu.
double wronskian(const LaminarFlow& flow, const PhysicalParams& params, double lambda,
                 double mu);

// Unique positive zero mu(lambda) of W(lambda, .). Requires the second
// bifurcation condition (throws ConditionFailed otherwise).
double find_mu(const LaminarFlow& flow, const PhysicalParams& params, double lambda);

BifurcationPoint bifurcation_point(const LaminarFlow& flow, const PhysicalParams& params);

struct WronskianSample {
  double lambda, mu, W;
};

std::vector<WronskianSample> wronskian_scan(const LaminarFlow& flow,
                                            const PhysicalParams& params,
                                            const std::vector<double>& lambdas,
                                            const std::vector<double>& mus);

}  // namespace flexwave
