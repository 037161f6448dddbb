#pragma once

#include <string>
#include <utility>

#include "flexwave/laminar.hpp"

// Closed-form reference values for irrotational flow and constant
// coefficients. Root finding and quadrature here go through Boost.Math so
// that nothing is shared with the shooting code they are compared against.
namespace flexwave::oracles {

struct OracleResult {
  double value = 0.0;
  std::string formula_id;
};

// Positive root C of (g + alpha C^2) tanh(sqrt(C) d) = (p0^2 / d^2) sqrt(C).
// Throws ConditionFailed when g d^3 / p0^2 >= 1.
OracleResult irrotational_C0(const PhysicalParams& params);

// lambda* from 2 pi / sqrt(C0), cross-checked against a direct root of the
// irrotational hydroelastic dispersion relation in lambda.
OracleResult irrotational_lambda_star(const PhysicalParams& params);

// Residual of the dispersion relation at a trial wavelength.
double dispersion_residual(const PhysicalParams& params, double lambda);

// Closed form of the forward shot for a constant coefficient a:
// f(p) = sinh(kappa (p - p0)) / kappa, kappa = sqrt(mu) / (lambda a).
// Returns (f(0), f'(0)).
std::pair<double, double> constant_a_shoot(const PhysicalParams& params, double a_const,
                                           double lambda, double mu);

// W(lambda, 0) = lambda^4 a^3(p0) (g int a^-3 - 1), integrated with
// composite Simpson over the stored a-samples.
double wloo_W0(const LaminarFlow& flow, const PhysicalParams& params, double lambda);

}  // namespace flexwave::oracles
