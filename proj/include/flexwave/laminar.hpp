#pragma once

#include <cstddef>
#include <vector>

#include "flexwave/numerics/interp.hpp"
#include "flexwave/vorticity.hpp"

namespace flexwave {

struct PhysicalParams {
  double g = 1.0;      // gravitational acceleration
  double d = 1.0;      // depth
  double p0 = -1.0;    // relative mass flux (negative)
  double alpha = 1.0;  // plate rigidity
};

// Throws DomainError unless g, d, alpha > 0 and p0 < 0.
void validate(const PhysicalParams& params);

// The x-independent solution: streamline heights H(p) and a = 1/H' on a
// uniform p-grid, plus the quantities the bifurcation analysis needs.
struct LaminarFlow {
  double theta = 0.0;
  double depth = 0.0;
  double p0 = 0.0;
  std::vector<double> p;      // uniform grid, p.front() = p0, p.back() = 0
  std::vector<double> H;      // H(p_i)
  std::vector<double> a;      // a(p_i) = (theta - 2 Gamma(p_i))^{1/2}
  std::vector<double> gamma;  // gamma(p_i)
  double a_min = 0.0;
  double a_max = 0.0;
  double inv_a3_integral = 0.0;  // int_{p0}^0 a^{-3} dp
  double cond2_value = 0.0;      // g * inv_a3_integral
  VorticityProfile profile = VorticityProfile::zero(-1.0);
  // Hermite interpolant of a with the exact slope a' = -gamma / a.
  numerics::CubicHermite a_interp;

  std::size_t size() const { return p.size(); }
  double dp() const { return (p.back() - p.front()) / static_cast<double>(p.size() - 1); }
  double a_at(double pp) const { return a_interp(pp); }
  double H_prime(std::size_t i) const { return 1.0 / a[i]; }
  // H'' from the laminar equation H'' = gamma H'^3.
  double H_second(std::size_t i) const {
    const double hp = 1.0 / a[i];
    return gamma[i] * hp * hp * hp;
  }
};

inline constexpr std::size_t kDefaultLaminarPoints = 257;

// D(theta) = int_{p0}^0 (theta - 2 Gamma(s))^{-1/2} ds, theta > 2 max Gamma.
double depth_integral(const VorticityProfile& profile, double theta);

struct ExistenceCheck {
  bool holds = false;
  double limit = 0.0;  // lim D(theta) as theta decreases to 2 max Gamma; may be +inf
};

ExistenceCheck check_existence(const VorticityProfile& profile, double d);

// Unique theta > 2 max Gamma with D(theta) = d. Throws ConditionFailed
// carrying the limit value when the existence condition fails.
double solve_theta(const VorticityProfile& profile, const PhysicalParams& params);

LaminarFlow build_laminar(const VorticityProfile& profile, const PhysicalParams& params,
                          std::size_t n_p = kDefaultLaminarPoints);

struct Cond2 {
  double value;
  bool holds;  // strict inequality value < 1
};

Cond2 cond2_value(const LaminarFlow& flow, const PhysicalParams& params);

}  // namespace flexwave
