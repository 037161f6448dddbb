#include "flexwave/sturm.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "flexwave/errors.hpp"
#include "flexwave/numerics/roots.hpp"

namespace flexwave {

namespace {

using State = std::array<double, 2>;

ShootResult integrate(const LaminarFlow& flow, double lambda, double mu, State y0,
                      bool backward) {
  if (!(lambda > 0)) throw DomainError("sturm: lambda must be positive");
  const double coeff = mu / (lambda * lambda);
  // (f, v) with v = a^3 f'; the conservative form avoids differentiating a.
  auto rhs = [&flow, coeff](double p, const State& y) -> State {
    const double a = flow.a_at(p);
    return {y[1] / (a * a * a), coeff * a * y[0]};
  };
  std::vector<double> nodes(flow.p.begin(), flow.p.end());
  if (backward) std::reverse(nodes.begin(), nodes.end());
  auto sol = numerics::dopri45<2>(rhs, y0, nodes, kShootOptions);

  ShootResult out;
  out.lambda = lambda;
  out.mu = mu;
  out.log_scale = sol.log_scale;
  const std::size_t n = nodes.size();
  out.f.resize(n);
  out.fprime.resize(n);
  for (std::size_t k = 0; k < n; ++k) {
    const std::size_t i = backward ? n - 1 - k : k;
    const double a = flow.a[i];
    out.f[i] = sol.y[k][0];
    out.fprime[i] = sol.y[k][1] / (a * a * a);
  }
  out.f0 = out.f.back();
  out.fp0 = out.fprime.back();
  return out;
}

// W / (lambda^4 a^3(p0)) without the exp(log_scale) factor; same sign as W.
double scaled_wronskian(const LaminarFlow& flow, const PhysicalParams& params,
                        double lambda, double mu) {
  const ShootResult r = shoot_f1(flow, lambda, mu);
  const double l4 = std::pow(lambda, 4);
  const double a0 = flow.a.back();
  const double ab = flow.a.front();
  return ((params.g + params.alpha * mu * mu / l4) * r.f0 - a0 * a0 * a0 * r.fp0) /
         (ab * ab * ab);
}

}  // namespace

ShootResult shoot_f1(const LaminarFlow& flow, double lambda, double mu) {
  const double ab = flow.a.front();
  return integrate(flow, lambda, mu, {0.0, ab * ab * ab}, false);
}

ShootResult shoot_f2(const LaminarFlow& flow, const PhysicalParams& params, double lambda,
                     double mu) {
  const double l4 = std::pow(lambda, 4);
  const double a0 = flow.a.back();
  const double a03 = a0 * a0 * a0;
  const double fp = params.g * l4 + params.alpha * mu * mu;
  return integrate(flow, lambda, mu, {l4 * a03, a03 * fp}, true);
}

double wronskian(const LaminarFlow& flow, const PhysicalParams& params, double lambda,
                 double mu) {
  const ShootResult r = shoot_f1(flow, lambda, mu);
  const double l4 = std::pow(lambda, 4);
  const double a0 = flow.a.back();
  const double w =
      (params.g * l4 + params.alpha * mu * mu) * r.f0 - l4 * a0 * a0 * a0 * r.fp0;
  return r.log_scale == 0.0 ? w : w * std::exp(r.log_scale);
}

double find_mu(const LaminarFlow& flow, const PhysicalParams& params, double lambda) {
  const Cond2 c2 = cond2_value(flow, params);
  if (!c2.holds) {
    std::ostringstream msg;
    msg << "no bifurcation: g * int a^-3 = " << c2.value << " is not below 1";
    throw ConditionFailed(msg.str(), c2.value);
  }
  auto w = [&](double mu) { return scaled_wronskian(flow, params, lambda, mu); };
  constexpr double kMuMax = 1e12;
  double lo = 0.0;
  double f_lo = w(0.0);
  double hi = 1.0;
  double f_hi = w(hi);
  while (!(f_hi > 0)) {
    lo = hi;
    f_lo = f_hi;
    hi *= 4.0;
    if (hi > kMuMax) {
      throw NumericalError("find_mu: no sign change of W below mu = 1e12");
    }
    f_hi = w(hi);
  }
  return numerics::brent(w, lo, hi, f_lo, f_hi, {1e-14, 0.0, 300}).x;
}

BifurcationPoint bifurcation_point(const LaminarFlow& flow, const PhysicalParams& params) {
  constexpr double two_pi = 2.0 * std::numbers::pi;
  BifurcationPoint bp;
  bp.C0 = find_mu(flow, params, 1.0);
  bp.lambda_star = two_pi / std::sqrt(bp.C0);
  const double mu = two_pi * two_pi;
  bp.f1_star = shoot_f1(flow, bp.lambda_star, mu);

  const double l4 = std::pow(bp.lambda_star, 4);
  const double a0 = flow.a.back();
  const double t1 = (params.g * l4 + params.alpha * mu * mu) * bp.f1_star.f0;
  const double t2 = l4 * a0 * a0 * a0 * bp.f1_star.fp0;
  const double scale = std::abs(t1) + std::abs(t2);
  if (!(std::abs(t1 - t2) <= 1e-8 * scale)) {
    std::ostringstream msg;
    msg << "bifurcation_point: W(lambda*, 4 pi^2) = " << (t1 - t2)
        << " not below tolerance (scale " << scale << ")";
    throw NumericalError(msg.str());
  }
  if (bp.f1_star.f0 < 0) {
    for (auto& v : bp.f1_star.f) v = -v;
    for (auto& v : bp.f1_star.fprime) v = -v;
    bp.f1_star.f0 = -bp.f1_star.f0;
    bp.f1_star.fp0 = -bp.f1_star.fp0;
  }
  return bp;
}

std::vector<WronskianSample> wronskian_scan(const LaminarFlow& flow,
                                            const PhysicalParams& params,
                                            const std::vector<double>& lambdas,
                                            const std::vector<double>& mus) {
  std::vector<WronskianSample> out;
  out.reserve(lambdas.size() * mus.size());
  for (double l : lambdas)
    for (double m : mus) out.push_back({l, m, wronskian(flow, params, l, m)});
  return out;
}

}  // namespace flexwave
