#include "flexwave/laminar.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "flexwave/errors.hpp"
#include "flexwave/numerics/quadrature.hpp"
#include "flexwave/numerics/roots.hpp"

namespace flexwave {

namespace {

constexpr numerics::QuadratureTol kDepthTol{1e-15, 1e-14};

void check_consistent(const VorticityProfile& profile, const PhysicalParams& params) {
  validate(params);
  if (std::abs(profile.p0() - params.p0) > 1e-14 * std::abs(params.p0)) {
    std::ostringstream msg;
    msg << "laminar: vorticity profile p0=" << profile.p0()
        << " differs from physical p0=" << params.p0;
    throw DomainError(msg.str());
  }
}

// The integrand has an inverse square-root singularity at the maximiser of
// Gamma when theta -> 2 max Gamma. Splitting there and substituting
// s = argmax -/+ t^2 turns it into a bounded integrand in t.
double depth_integral_split(const VorticityProfile& profile, double theta,
                            double argmax) {
  auto integrand = [&](double s) {
    const double r = theta - 2.0 * eval_Gamma(profile, s);
    return 1.0 / std::sqrt(std::max(r, std::numeric_limits<double>::min()));
  };
  const double p0 = profile.p0();
  double total = 0.0;
  if (argmax > p0) {
    const double tmax = std::sqrt(argmax - p0);
    total += numerics::gauss_kronrod(
        [&](double t) { return 2.0 * t * integrand(std::max(argmax - t * t, p0)); }, 0.0,
        tmax, kDepthTol);
  }
  if (argmax < 0.0) {
    const double tmax = std::sqrt(-argmax);
    total += numerics::gauss_kronrod(
        [&](double t) { return 2.0 * t * integrand(std::min(argmax + t * t, 0.0)); },
        0.0, tmax, kDepthTol);
  }
  return total;
}

}  // namespace

void validate(const PhysicalParams& params) {
  if (!(params.g > 0)) throw DomainError("params: g must be positive");
  if (!(params.d > 0)) throw DomainError("params: depth must be positive");
  if (!(params.alpha > 0)) throw DomainError("params: alpha must be positive");
  if (!(params.p0 < 0)) throw DomainError("params: p0 must be negative");
}

double depth_integral(const VorticityProfile& profile, double theta) {
  const GammaMax gm = max_Gamma_with_location(profile);
  if (!(theta > 2.0 * gm.value)) {
    std::ostringstream msg;
    msg << "depth_integral: theta=" << theta << " must exceed 2 max Gamma = "
        << 2.0 * gm.value;
    throw DomainError(msg.str());
  }
  return depth_integral_split(profile, theta, gm.argmax);
}

ExistenceCheck check_existence(const VorticityProfile& profile, double d) {
  const GammaMax gm = max_Gamma_with_location(profile);
  constexpr int kLevels = 6;
  double values[kLevels];
  for (int k = 0; k < kLevels; ++k) {
    const double delta = std::pow(10.0, -2.0 * (k + 1));
    const double theta = 2.0 * gm.value * (1.0 + delta) + delta;
    values[k] = depth_integral_split(profile, theta, gm.argmax);
  }
  ExistenceCheck out;
  const double d_prev = values[kLevels - 2] - values[kLevels - 3];
  const double d_last = values[kLevels - 1] - values[kLevels - 2];
  const double scale = std::abs(values[kLevels - 1]);
  if (!std::isfinite(values[kLevels - 1])) {
    out.limit = std::numeric_limits<double>::infinity();
  } else if (std::abs(d_last) <= 1e-13 * scale) {
    out.limit = values[kLevels - 1];
  } else {
    const double ratio = d_last / d_prev;
    // A finite limit approaches like sqrt(theta - theta_0): each factor 100
    // in theta shrinks the increment tenfold. Log or power growth keeps the
    // ratio near or above one.
    if (!(ratio < 0.5)) {
      out.limit = std::numeric_limits<double>::infinity();
    } else if (ratio <= 0.0) {
      out.limit = values[kLevels - 1];  // increments are at rounding level
    } else {
      out.limit = values[kLevels - 1] + d_last * ratio / (1.0 - ratio);
    }
  }
  out.holds = out.limit > d;
  return out;
}

double solve_theta(const VorticityProfile& profile, const PhysicalParams& params) {
  check_consistent(profile, params);
  const ExistenceCheck ex = check_existence(profile, params.d);
  if (!ex.holds) {
    std::ostringstream msg;
    msg << "laminar flow does not exist: limit of the depth integral " << ex.limit
        << " does not exceed d=" << params.d;
    throw ConditionFailed(msg.str(), ex.limit);
  }
  const GammaMax gm = max_Gamma_with_location(profile);
  auto residual = [&](double theta) {
    return depth_integral_split(profile, theta, gm.argmax) - params.d;
  };
  const double lo = 2.0 * gm.value * (1.0 + 1e-12) + 1e-12;
  const double f_lo = residual(lo);
  if (!(f_lo > 0)) {
    throw ConditionFailed("laminar: depth integral at the lower bracket is below d",
                          ex.limit);
  }
  double hi = lo + 1.0;
  double f_hi = residual(hi);
  for (int i = 0; f_hi >= 0; ++i) {
    if (i > 200) throw NumericalError("solve_theta: upper bracket not found");
    hi = lo + 2.0 * (hi - lo);
    f_hi = residual(hi);
  }
  return numerics::brent(residual, lo, hi, f_lo, f_hi, {1e-13, 0.0, 300}).x;
}

LaminarFlow build_laminar(const VorticityProfile& profile, const PhysicalParams& params,
                          std::size_t n_p) {
  if (n_p < 5) throw DomainError("build_laminar: need at least 5 grid points");
  const double theta = solve_theta(profile, params);
  LaminarFlow flow;
  flow.theta = theta;
  flow.depth = params.d;
  flow.p0 = params.p0;
  flow.profile = profile;
  flow.p.resize(n_p);
  flow.a.resize(n_p);
  flow.H.resize(n_p);
  flow.gamma.resize(n_p);
  const double h = -params.p0 / static_cast<double>(n_p - 1);
  for (std::size_t i = 0; i < n_p; ++i) {
    flow.p[i] = (i + 1 == n_p) ? 0.0 : params.p0 + static_cast<double>(i) * h;
  }
  flow.p.front() = params.p0;
  for (std::size_t i = 0; i < n_p; ++i) {
    flow.a[i] = std::sqrt(theta - 2.0 * eval_Gamma(profile, flow.p[i]));
    flow.gamma[i] = eval_gamma(profile, flow.p[i]);
  }
  auto inv_a = [&](double s) { return 1.0 / std::sqrt(theta - 2.0 * eval_Gamma(profile, s)); };
  flow.H.back() = 0.0;
  for (std::size_t i = n_p - 1; i-- > 0;) {
    flow.H[i] = flow.H[i + 1] -
                numerics::gauss_kronrod(inv_a, flow.p[i], flow.p[i + 1], kDepthTol);
  }
  flow.a_min = *std::min_element(flow.a.begin(), flow.a.end());
  flow.a_max = *std::max_element(flow.a.begin(), flow.a.end());

  std::vector<double> slope(n_p);
  for (std::size_t i = 0; i < n_p; ++i) slope[i] = -flow.gamma[i] / flow.a[i];
  flow.a_interp = numerics::CubicHermite(flow.p, flow.a, std::move(slope));

  flow.inv_a3_integral = numerics::gauss_kronrod(
      [&](double s) {
        const double v = inv_a(s);
        return v * v * v;
      },
      params.p0, 0.0, kDepthTol);
  flow.cond2_value = params.g * flow.inv_a3_integral;
  return flow;
}

Cond2 cond2_value(const LaminarFlow& flow, const PhysicalParams& params) {
  const double v = params.g * flow.inv_a3_integral;
  return {v, v < 1.0};
}

}  // namespace flexwave
