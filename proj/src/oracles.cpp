#include "flexwave/oracles.hpp"

#include <boost/math/tools/roots.hpp>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <sstream>
#include <vector>

#include "flexwave/errors.hpp"

namespace flexwave::oracles {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

double dispersion_in_C(const PhysicalParams& p, double C) {
  const double r = std::sqrt(C);
  return (p.g + p.alpha * C * C) * std::tanh(r * p.d) - (p.p0 * p.p0) / (p.d * p.d) * r;
}

void require_irrotational_condition(const PhysicalParams& p) {
  validate(p);
  const double c = p.g * p.d * p.d * p.d / (p.p0 * p.p0);
  if (!(c < 1.0)) {
    std::ostringstream msg;
    msg << "irrotational bifurcation condition g d^3 / p0^2 < 1 fails (" << c << ")";
    throw ConditionFailed(msg.str(), c);
  }
}

template <class F>
double toms748_root(F f, double lo, double hi) {
  std::uintmax_t iters = 200;
  auto r = boost::math::tools::toms748_solve(
      f, lo, hi, boost::math::tools::eps_tolerance<double>(52), iters);
  return 0.5 * (r.first + r.second);
}

}  // namespace

double dispersion_residual(const PhysicalParams& params, double lambda) {
  const double k = kTwoPi / lambda;
  return (params.g + params.alpha * std::pow(k, 4)) * std::tanh(k * params.d) -
         (params.p0 * params.p0) / (params.d * params.d) * k;
}

OracleResult irrotational_C0(const PhysicalParams& params) {
  require_irrotational_condition(params);
  auto f = [&](double C) { return dispersion_in_C(params, C); };
  double lo = 1e-12;
  double hi = 1.0;
  while (f(hi) <= 0) {
    lo = hi;
    hi *= 2.0;
    if (hi > 1e15) throw NumericalError("irrotational_C0: no upper bracket");
  }
  return {toms748_root(f, lo, hi), "irrotational dispersion relation in C0"};
}

OracleResult irrotational_lambda_star(const PhysicalParams& params) {
  const double C0 = irrotational_C0(params).value;
  const double via_c0 = kTwoPi / std::sqrt(C0);

  auto f = [&](double lambda) { return dispersion_residual(params, lambda); };
  // Short waves are dominated by the plate term (positive residual), long
  // waves by the flux term (negative residual under the condition).
  double lo = 0.5 * via_c0;
  while (f(lo) <= 0) lo *= 0.5;
  double hi = 2.0 * via_c0;
  while (f(hi) >= 0) hi *= 2.0;
  const double direct = toms748_root(f, lo, hi);
  if (std::abs(direct - via_c0) > 1e-10 * via_c0) {
    std::ostringstream msg;
    msg.precision(17);
    msg << "irrotational_lambda_star: routes disagree (" << via_c0 << " vs " << direct
        << ")";
    throw NumericalError(msg.str());
  }
  return {via_c0, "2 pi / sqrt(C0), checked against the dispersion relation"};
}

std::pair<double, double> constant_a_shoot(const PhysicalParams& params, double a_const,
                                           double lambda, double mu) {
  if (!(a_const > 0) || !(lambda > 0) || mu < 0) {
    throw DomainError("constant_a_shoot: need a > 0, lambda > 0, mu >= 0");
  }
  const double L = -params.p0;
  const double kappa = std::sqrt(mu) / (lambda * a_const);
  if (kappa * L < 1e-8) {
    // sinh(kL)/k = L (1 + (kL)^2/6), cosh(kL) = 1 + (kL)^2/2
    const double x2 = kappa * kappa * L * L;
    return {L * (1.0 + x2 / 6.0), 1.0 + 0.5 * x2};
  }
  return {std::sinh(kappa * L) / kappa, std::cosh(kappa * L)};
}

double wloo_W0(const LaminarFlow& flow, const PhysicalParams& params, double lambda) {
  const std::size_t n = flow.a.size();
  std::vector<double> y(n);
  for (std::size_t i = 0; i < n; ++i) y[i] = 1.0 / std::pow(flow.a[i], 3);
  // Composite Simpson written out here rather than borrowed from numerics/.
  const double h = flow.dp();
  double integral = 0.0;
  std::size_t end = n - 1;
  if ((n - 1) % 2 == 1) {
    const std::size_t k = n - 4;
    integral += 3.0 * h / 8.0 * (y[k] + 3.0 * y[k + 1] + 3.0 * y[k + 2] + y[k + 3]);
    end = k;
  }
  for (std::size_t i = 0; i + 2 <= end; i += 2) {
    integral += h / 3.0 * (y[i] + 4.0 * y[i + 1] + y[i + 2]);
  }
  const double ab = flow.a.front();
  return std::pow(lambda, 4) * ab * ab * ab * (params.g * integral - 1.0);
}

}  // namespace flexwave::oracles
