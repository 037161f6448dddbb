#include "flexwave/surface_ops.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "flexwave/errors.hpp"
#include "flexwave/spectral.hpp"

namespace flexwave {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kMeanTol = 1e-12;

void check_same_size(const SurfaceTraces& t) {
  if (t.h0.half.size() != t.hp0.half.size() || t.h0.half.size() != t.h0_q.half.size()) {
    throw DomainError("surface traces: inconsistent sample counts");
  }
  if (!(t.lambda > 0)) throw DomainError("surface traces: lambda must be positive");
}

void check_N(std::size_t N) {
  if (N < 4 || (N & (N - 1)) != 0) {
    throw DomainError("periodic function: N must be a power of two >= 4");
  }
}

}  // namespace

PeriodicEvenFn::PeriodicEvenFn(std::vector<double> v) : half(std::move(v)) {
  check_N(2 * (half.size() - 1));
}

PeriodicEvenFn PeriodicEvenFn::from_function(std::size_t N,
                                             const std::function<double(double)>& f) {
  check_N(N);
  std::vector<double> v(N / 2 + 1);
  for (std::size_t j = 0; j < v.size(); ++j) v[j] = f(static_cast<double>(j) / N);
  return PeriodicEvenFn(std::move(v));
}

PeriodicEvenFn PeriodicEvenFn::zero(std::size_t N) {
  check_N(N);
  return PeriodicEvenFn(std::vector<double>(N / 2 + 1, 0.0));
}

std::vector<double> PeriodicEvenFn::samples() const { return spectral::full_from_even(half); }
std::vector<double> PeriodicEvenFn::cos_coeffs() const { return spectral::cos_coeffs(half); }
double PeriodicEvenFn::mean() const { return spectral::mean(half); }

SurfaceTraces SurfaceTraces::make(PeriodicEvenFn h0, PeriodicEvenFn hp0, double lambda) {
  SurfaceTraces t;
  t.h0_q.half = spectral::even_derivative(h0.half);
  t.h0 = std::move(h0);
  t.hp0 = std::move(hp0);
  t.lambda = lambda;
  check_same_size(t);
  return t;
}

SurfaceTraces SurfaceTraces::laminar(const LaminarFlow& flow, std::size_t N, double lambda) {
  const double hp = flow.H_prime(flow.size() - 1);
  return make(PeriodicEvenFn::zero(N),
              PeriodicEvenFn(std::vector<double>(N / 2 + 1, hp)), lambda);
}

std::vector<double> omega_of(std::span<const double> slope) {
  std::vector<double> w(slope.size());
  for (std::size_t i = 0; i < slope.size(); ++i) w[i] = std::sqrt(1.0 + slope[i] * slope[i]);
  return w;
}

PlateResult plate_H(const PeriodicEvenFn& zeta) {
  PlateResult out;
  out.resolved = spectral::tail_ratio(zeta.cos_coeffs()) < 1e-10;
  const auto z1 = spectral::even_derivative(zeta.half);
  const auto z2 = spectral::even_second_derivative(zeta.half);
  const auto w = omega_of(z1);
  const std::size_t n = w.size();
  std::vector<double> kappa(n), t(n);
  for (std::size_t j = 0; j < n; ++j) kappa[j] = z2[j] / (w[j] * w[j] * w[j]);
  const auto dkappa = spectral::even_derivative(kappa);
  for (std::size_t j = 0; j < n; ++j) t[j] = dkappa[j] / w[j];
  const auto dt = spectral::odd_derivative(t);
  std::vector<double> H(n);
  for (std::size_t j = 0; j < n; ++j) {
    H[j] = dt[j] / w[j] + 0.5 * kappa[j] * kappa[j] * kappa[j];
  }
  out.value = PeriodicEvenFn(std::move(H));
  return out;
}

namespace {

PeriodicEvenFn helmholtz_any(const PeriodicEvenFn& f) {
  auto c = f.cos_coeffs();
  for (std::size_t k = 1; k < c.size(); ++k) {
    const double w = 2.0 * kPi * static_cast<double>(k);
    c[k] /= 1.0 + w * w;
  }
  return PeriodicEvenFn(spectral::cos_synth(c));
}

}  // namespace

PeriodicEvenFn helmholtz_inv(const PeriodicEvenFn& f) {
  const double m = f.mean();
  if (std::abs(m) > kMeanTol) {
    std::ostringstream msg;
    msg << "helmholtz_inv: input mean " << m << " is not zero";
    throw DomainError(msg.str());
  }
  auto c = f.cos_coeffs();
  c[0] = 0.0;
  for (std::size_t k = 1; k < c.size(); ++k) {
    const double w = 2.0 * kPi * static_cast<double>(k);
    c[k] /= 1.0 + w * w;
  }
  return PeriodicEvenFn(spectral::cos_synth(c));
}

PeriodicEvenFn op_B(const SurfaceTraces& t, const PhysicalParams& params) {
  check_same_size(t);
  const double lam = t.lambda;
  const std::size_t n = t.h0.half.size();
  std::vector<double> G(n), R(n);
  for (std::size_t j = 0; j < n; ++j) {
    const double hp = t.hp0.half[j];
    if (!(hp > 0)) {
      std::ostringstream msg;
      msg << "op_B: surface h_p = " << hp << " is not positive at q = " << j;
      throw DomainError(msg.str());
    }
    const double hq = t.h0_q.half[j];
    G[j] = (lam * lam + hq * hq) / (hp * hp);
  }
  const double Gmean = spectral::mean(G);
  for (std::size_t j = 0; j < n; ++j) {
    R[j] = lam / (2.0 * params.alpha) *
           (Gmean - G[j] - 2.0 * params.g * lam * lam * t.h0.half[j]);
  }
  const double m = spectral::mean(R);
  for (auto& v : R) v -= m;
  return PeriodicEvenFn(std::move(R));
}

PeriodicEvenFn phi_from(const PeriodicEvenFn& B, const PeriodicEvenFn& zeta) {
  auto phi = spectral::even_double_antiderivative(B.half);
  const auto z1 = spectral::even_derivative(zeta.half);
  const auto z2 = spectral::even_second_derivative(zeta.half);
  const auto w = omega_of(z1);
  std::vector<double> g(z1.size());
  for (std::size_t j = 0; j < g.size(); ++j) g[j] = z1[j] * z2[j] * z2[j] / std::pow(w[j], 7);
  g.front() = 0.0;
  g.back() = 0.0;
  const auto corr = spectral::odd_antiderivative(g);
  for (std::size_t j = 0; j < phi.size(); ++j) phi[j] -= 2.5 * corr[j];
  return PeriodicEvenFn(std::move(phi));
}

namespace {

PeriodicEvenFn zeta_of(const SurfaceTraces& t) {
  std::vector<double> z(t.h0.half);
  for (auto& v : z) v /= t.lambda;
  return PeriodicEvenFn(std::move(z));
}

}  // namespace

PeriodicEvenFn op_Phi(const SurfaceTraces& t, const PhysicalParams& params) {
  return phi_from(op_B(t, params), zeta_of(t));
}

PeriodicEvenFn op_Psi(const SurfaceTraces& t, const PhysicalParams& params,
                      bool require_zero_mean) {
  check_same_size(t);
  const double m0 = t.h0.mean();
  if (require_zero_mean && std::abs(m0) > kMeanTol) {
    std::ostringstream msg;
    msg << "op_Psi: surface trace mean " << m0 << " is not zero";
    throw DomainError(msg.str());
  }
  const PeriodicEvenFn zeta = zeta_of(t);
  const PeriodicEvenFn phi = phi_from(op_B(t, params), zeta);
  const auto w = omega_of(spectral::even_derivative(zeta.half));
  const std::size_t n = w.size();
  std::vector<double> w5(n), w5phi(n);
  for (std::size_t j = 0; j < n; ++j) {
    w5[j] = std::pow(w[j], 5);
    w5phi[j] = w5[j] * phi.half[j];
  }
  const double ratio = spectral::mean(w5phi) / spectral::mean(w5);
  std::vector<double> arg(n);
  for (std::size_t j = 0; j < n; ++j) {
    arg[j] = t.lambda * w5[j] * ratio + t.h0.half[j] - t.lambda * w5phi[j];
  }
  return helmholtz_any(PeriodicEvenFn(std::move(arg)));
}

}  // namespace flexwave
