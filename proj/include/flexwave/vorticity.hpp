#pragma once

#include <filesystem>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "flexwave/numerics/interp.hpp"

namespace flexwave {

// Vorticity function gamma(p) on the mass-flux interval [p0, 0], together
// with its antiderivative Gamma(p) = int_{p0}^p gamma.
class VorticityProfile {
 public:
  enum class Kind { zero, constant, tabulated };

  static VorticityProfile zero(double p0);
  static VorticityProfile constant(double gamma0, double p0);
  // Samples must be strictly increasing in p and cover [p0, 0] exactly;
  // p0 is taken from the first sample.
  static VorticityProfile tabulated(std::vector<std::pair<double, double>> samples);
  // Two-column CSV with header `p,gamma`, p ascending.
  static VorticityProfile from_csv(const std::filesystem::path& path);

  Kind kind() const { return kind_; }
  double p0() const { return p0_; }
  double gamma0() const { return gamma0_; }
  const std::vector<std::pair<double, double>>& samples() const { return samples_; }

  // Interpolant slope of gamma (zero for the analytic kinds).
  double gamma_slope(double p) const;

 private:
  friend double eval_gamma(const VorticityProfile&, double);
  friend double eval_Gamma(const VorticityProfile&, double);

  VorticityProfile(Kind kind, double p0) : kind_(kind), p0_(p0) {}

  Kind kind_;
  double p0_;
  double gamma0_ = 0.0;
  std::vector<std::pair<double, double>> samples_;
  std::shared_ptr<const numerics::CubicHermite> interp_;
  std::vector<double> knot_Gamma_;  // Gamma at each knot
};

double eval_gamma(const VorticityProfile& profile, double p);
double eval_Gamma(const VorticityProfile& profile, double p);

struct GammaMax {
  double value;
  double argmax;
};

// Maximum of Gamma on [p0, 0]: 2048 uniform samples, then golden-section
// refinement around the best sample.
GammaMax max_Gamma_with_location(const VorticityProfile& profile);
double max_Gamma(const VorticityProfile& profile);

}  // namespace flexwave
