#include "flexwave/vorticity.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "flexwave/errors.hpp"
#include "flexwave/numerics/quadrature.hpp"
#include "flexwave/numerics/roots.hpp"

namespace flexwave {

namespace {

constexpr numerics::QuadratureTol kGammaTol{1e-12, 1e-10};
constexpr int kMaxSamples = 2048;

// Grid arithmetic may land a hair outside the interval; anything beyond this
// slack is a caller error.
double checked(const VorticityProfile& profile, double p) {
  const double slack = 1e-12 * std::abs(profile.p0());
  if (!(p >= profile.p0() - slack && p <= slack)) {
    std::ostringstream msg;
    msg << "vorticity: p=" << p << " outside [" << profile.p0() << ", 0]";
    throw DomainError(msg.str());
  }
  return std::clamp(p, profile.p0(), 0.0);
}

}  // namespace

VorticityProfile VorticityProfile::zero(double p0) {
  if (!(p0 < 0)) throw DomainError("vorticity: p0 must be negative");
  return VorticityProfile(Kind::zero, p0);
}

VorticityProfile VorticityProfile::constant(double gamma0, double p0) {
  if (!(p0 < 0)) throw DomainError("vorticity: p0 must be negative");
  if (!std::isfinite(gamma0)) throw DomainError("vorticity: gamma0 must be finite");
  VorticityProfile v(Kind::constant, p0);
  v.gamma0_ = gamma0;
  return v;
}

VorticityProfile VorticityProfile::tabulated(
    std::vector<std::pair<double, double>> samples) {
  if (samples.size() < 2) {
    throw DomainError("vorticity: tabulated profile needs at least two samples");
  }
  const double p0 = samples.front().first;
  if (!(p0 < 0)) throw DomainError("vorticity: first sample must have p0 < 0");
  if (samples.back().first != 0.0) {
    throw DomainError("vorticity: last sample must be at p = 0");
  }
  std::vector<double> x, y;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    if (i > 0 && !(samples[i].first > samples[i - 1].first)) {
      throw DomainError("vorticity: samples must be strictly increasing in p");
    }
    if (!std::isfinite(samples[i].second)) {
      throw DomainError("vorticity: non-finite gamma sample");
    }
    x.push_back(samples[i].first);
    y.push_back(samples[i].second);
  }
  VorticityProfile v(Kind::tabulated, p0);
  v.samples_ = std::move(samples);
  v.interp_ = std::make_shared<const numerics::CubicHermite>(
      numerics::make_pchip(std::move(x), std::move(y)));
  v.knot_Gamma_.assign(v.samples_.size(), 0.0);
  const auto& f = *v.interp_;
  for (std::size_t i = 1; i < v.samples_.size(); ++i) {
    v.knot_Gamma_[i] =
        v.knot_Gamma_[i - 1] +
        numerics::adaptive_simpson([&f](double s) { return f(s); },
                                   v.samples_[i - 1].first, v.samples_[i].first,
                                   kGammaTol);
  }
  return v;
}

VorticityProfile VorticityProfile::from_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DomainError("vorticity: cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw DomainError("vorticity: empty CSV " + path.string());
  line.erase(std::remove_if(line.begin(), line.end(), ::isspace), line.end());
  if (line != "p,gamma") {
    throw DomainError("vorticity: CSV header must be `p,gamma`, got `" + line + "`");
  }
  std::vector<std::pair<double, double>> samples;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::istringstream row(line);
    std::string a, b;
    if (!std::getline(row, a, ',') || !std::getline(row, b)) {
      throw DomainError("vorticity: malformed CSV line " + std::to_string(lineno));
    }
    try {
      samples.emplace_back(std::stod(a), std::stod(b));
    } catch (const std::exception&) {
      throw DomainError("vorticity: non-numeric CSV line " + std::to_string(lineno));
    }
  }
  return tabulated(std::move(samples));
}

double VorticityProfile::gamma_slope(double p) const {
  if (kind_ != Kind::tabulated) return 0.0;
  return interp_->derivative(checked(*this, p));
}

double eval_gamma(const VorticityProfile& profile, double p) {
  p = checked(profile, p);
  switch (profile.kind_) {
    case VorticityProfile::Kind::zero:
      return 0.0;
    case VorticityProfile::Kind::constant:
      return profile.gamma0_;
    case VorticityProfile::Kind::tabulated:
      return (*profile.interp_)(p);
  }
  return 0.0;
}

double eval_Gamma(const VorticityProfile& profile, double p) {
  p = checked(profile, p);
  if (p == profile.p0_) return 0.0;
  switch (profile.kind_) {
    case VorticityProfile::Kind::zero:
      return 0.0;
    case VorticityProfile::Kind::constant: {
      const double g0 = profile.gamma0_;
      return numerics::adaptive_simpson([g0](double) { return g0; }, profile.p0_, p,
                                        kGammaTol);
    }
    case VorticityProfile::Kind::tabulated: {
      const auto& s = profile.samples_;
      auto it = std::upper_bound(s.begin(), s.end(), p,
                                 [](double v, const auto& e) { return v < e.first; });
      std::size_t k = static_cast<std::size_t>(it - s.begin()) - 1;
      k = std::min(k, s.size() - 1);
      const auto& f = *profile.interp_;
      return profile.knot_Gamma_[k] +
             numerics::adaptive_simpson([&f](double t) { return f(t); }, s[k].first, p,
                                        kGammaTol);
    }
  }
  return 0.0;
}

GammaMax max_Gamma_with_location(const VorticityProfile& profile) {
  const double p0 = profile.p0();
  const double h = -p0 / (kMaxSamples - 1);
  int best = 0;
  double best_val = 0.0;  // Gamma(p0) = 0
  for (int i = 1; i < kMaxSamples; ++i) {
    const double p = (i == kMaxSamples - 1) ? 0.0 : p0 + i * h;
    const double v = eval_Gamma(profile, p);
    if (v > best_val) {
      best_val = v;
      best = i;
    }
  }
  if (best == 0 || best == kMaxSamples - 1) {
    return {best_val, best == 0 ? p0 : 0.0};
  }
  const double lo = p0 + (best - 1) * h;
  const double hi = p0 + (best + 1) * h;
  const double x = numerics::golden_maximize(
      [&profile](double p) { return eval_Gamma(profile, p); }, lo, hi, 1e-12);
  const double v = eval_Gamma(profile, x);
  if (v >= best_val) return {v, x};
  return {best_val, p0 + best * h};
}

double max_Gamma(const VorticityProfile& profile) {
  return max_Gamma_with_location(profile).value;
}

}  // namespace flexwave
