#include <algorithm>
#include <cmath>
#include <numbers>

#include "doctest.h"
#include "flexwave/errors.hpp"
#include "flexwave/reconstruct.hpp"
#include "flexwave/spectral.hpp"

using namespace flexwave;

namespace {

constexpr double kPi = std::numbers::pi;
const PhysicalParams kRef{1.0, 1.0, -2.0, 0.5};

VorticityProfile tabulated_profile() {
  std::vector<std::pair<double, double>> s;
  for (int i = 0; i <= 16; ++i) {
    const double p = -2.0 + 0.125 * i;
    s.emplace_back(p, 0.4 * std::cos(1.3 * p) - 0.1);
  }
  return VorticityProfile::tabulated(s);
}

std::vector<VorticityProfile> profiles() {
  return {VorticityProfile::zero(-2.0), VorticityProfile::constant(1.0, -2.0),
          tabulated_profile()};
}

double max_abs(const std::vector<double>& v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

BranchPoint branch_point(const LaminarFlow& flow, double s, std::size_t n_q) {
  const auto bif = bifurcation_point(flow, kRef);
  auto br = continue_branch(bif, s, 2, flow, kRef, n_q);
  REQUIRE(br.complete);
  return br.points.back();
}

}  // namespace

TEST_CASE("periodic spectral derivative") {
  const std::size_t N = 32;
  std::vector<double> f(N), d1(N), d2(N);
  for (std::size_t j = 0; j < N; ++j) {
    const double q = static_cast<double>(j) / N;
    f[j] = 0.2 + std::cos(2 * kPi * q) + 0.3 * std::sin(4 * kPi * q);
    d1[j] = -2 * kPi * std::sin(2 * kPi * q) + 1.2 * kPi * std::cos(4 * kPi * q);
    d2[j] = -4 * kPi * kPi * std::cos(2 * kPi * q) - 4.8 * kPi * kPi * std::sin(4 * kPi * q);
  }
  const auto g1 = spectral::periodic_derivative(f, 1);
  const auto g2 = spectral::periodic_derivative(f, 2);
  const auto g0 = spectral::periodic_derivative(f, 0);
  for (std::size_t j = 0; j < N; ++j) {
    CHECK(std::abs(g1[j] - d1[j]) < 1e-12);
    CHECK(std::abs(g2[j] - d2[j]) < 1e-11);
    CHECK(std::abs(g0[j] - f[j]) < 1e-14);
  }
}

TEST_CASE("bending operator matches the scaled plate operator") {
  const double lam = 2.5;
  const auto zeta = PeriodicEvenFn::from_function(
      64, [](double q) { return 0.05 * std::cos(2 * kPi * q) + 0.01 * std::cos(4 * kPi * q); });
  const auto ref = plate_H(zeta).value.samples();
  auto eta = zeta.samples();
  for (auto& e : eta) e *= lam;
  const auto H = bending_operator(eta, lam);
  const double scale = max_abs(ref) / (lam * lam * lam);
  for (std::size_t j = 0; j < H.size(); ++j) {
    CHECK(std::abs(H[j] - ref[j] / (lam * lam * lam)) < 1e-9 * scale);
  }
}

TEST_CASE("laminar fields without vorticity") {
  const auto flow = build_laminar(VorticityProfile::zero(-2.0), kRef, 129);
  const auto s = fields_from_height(HeightField::zero(32, flow.size(), 3.0), flow, kRef);
  CHECK(s.Q == doctest::Approx(4.0).epsilon(1e-12));
  CHECK(s.E == doctest::Approx(2.0).epsilon(1e-12));
  for (std::size_t k = 0; k < s.u.size(); ++k) {
    CHECK(std::abs(s.u[k] + 2.0) < 1e-13);
    CHECK(s.v[k] == 0.0);
    CHECK(std::abs(s.P[k] + kRef.g * s.y[k]) < 1e-12);
  }
  CHECK(max_abs(s.eta) == 0.0);
  CHECK(s.y.front() == doctest::Approx(-kRef.d).epsilon(1e-12));
}

TEST_CASE("Bernoulli constant of the constant vorticity flow") {
  const auto flow = build_laminar(VorticityProfile::constant(1.0, -2.0), kRef, 129);
  const auto f = HeightField::zero(32, flow.size(), 2.0);
  CHECK(std::abs(bernoulli_Q(f, flow) - 2.25) < 1e-9);
}

TEST_CASE("laminar flows pass every residual") {
  for (const auto& prof : profiles()) {
    const auto flow = build_laminar(prof, kRef, 129);
    const auto s = fields_from_height(HeightField::zero(32, flow.size(), 4.0), flow, kRef);
    const auto r = euler_residual(s, flow, kRef);
    CHECK(r.all_pass());
    for (const auto& e : r.entries) {
      if (e.name != "max_u") CHECK(e.value < 1e-9);
    }
    CHECK(r.get("max_u").value < 0);
  }
}

TEST_CASE("inadmissible heights are rejected") {
  const auto flow = build_laminar(VorticityProfile::zero(-2.0), kRef, 65);
  auto f = HeightField::zero(16, flow.size(), 1.0);
  for (std::size_t j = 0; j < f.cols(); ++j) f(flow.size() - 1, j) = -1.0;
  CHECK_THROWS_AS(fields_from_height(f, flow, kRef), DomainError);
}

TEST_CASE("profile diagnostics") {
  const std::size_t N = 64;
  const double lam = 3.0;
  std::vector<double> c(N), z(N, 0.0), bumpy(N), shifted(N);
  for (std::size_t j = 0; j < N; ++j) {
    const double t = 2 * kPi * static_cast<double>(j) / N;
    c[j] = std::cos(t);
    bumpy[j] = std::cos(t) + 0.6 * std::cos(3 * t);
    shifted[j] = std::cos(t - 0.3);
  }
  const auto d = profile_diagnostics(c, lam);
  CHECK(d.crest_x == 0.0);
  CHECK(d.trough_x == doctest::Approx(lam / 2));
  CHECK(d.monotone);
  CHECK_FALSE(d.degenerate);
  CHECK(d.symmetry_defect < 1e-15);
  CHECK(std::abs(d.mean) < 1e-15);

  CHECK(profile_diagnostics(z, lam).degenerate);
  CHECK_FALSE(profile_diagnostics(z, lam).monotone);

  const auto b = profile_diagnostics(bumpy, lam);
  CHECK(b.crest_x == 0.0);
  CHECK_FALSE(b.monotone);
  CHECK(profile_diagnostics(shifted, lam).symmetry_defect > 0.1);
}

TEST_CASE("branch solution: shape and residuals") {
  for (const auto& prof : profiles()) {
    const auto flow = build_laminar(prof, kRef, 129);
    const auto pt = branch_point(flow, 1e-2, 64);
    const auto s = fields_from_height(pt.field, flow, kRef);
    const auto d = profile_diagnostics(s.eta, s.lambda);
    CHECK(d.crest_x < s.lambda / 64);
    CHECK(d.trough_x == doctest::Approx(s.lambda / 2));
    CHECK(d.monotone);
    CHECK(d.symmetry_defect < 1e-10);
    CHECK(std::abs(d.mean) < 1e-10);

    const auto r = euler_residual(s, flow, kRef);
    for (const auto& e : r.entries) {
      INFO(e.name << " = " << e.value << " (tol " << e.tol << ")");
      CHECK(e.pass());
    }
    CHECK(r.get("bernoulli").value < r.grid_tol);
    CHECK(r.get("plate_integral").value < 1e-9);
    CHECK(r.get("mean_eta").value < 1e-10);
    for (std::size_t j = 0; j < s.n_q; ++j) CHECK(s.v[s.idx(0, j)] == 0.0);

    // Q is the surface mean of |grad psi|^2
    double m = 0.0;
    for (std::size_t j = 0; j < s.n_q; ++j) {
      const std::size_t k = s.idx(s.n_p - 1, j);
      m += s.u[k] * s.u[k] + s.v[k] * s.v[k];
    }
    CHECK(m / s.n_q == doctest::Approx(s.Q).epsilon(1e-12));
  }
}

TEST_CASE("small amplitude surface is dominated by the first cosine mode") {
  const auto flow = build_laminar(tabulated_profile(), kRef, 129);
  const auto pt = branch_point(flow, 1e-3, 32);
  const auto s = fields_from_height(pt.field, flow, kRef);
  std::vector<double> half(s.eta.begin(), s.eta.begin() + 17);
  const auto c = spectral::cos_coeffs(half);
  double total = 0.0;
  for (double v : c) total += v * v;
  CHECK(c[1] > 0);
  CHECK(c[1] * c[1] / total >= 0.99);
}

TEST_CASE("residuals converge at second order") {
  const auto prof = VorticityProfile::constant(1.0, -2.0);
  std::vector<ResidualReport> reps;
  for (auto [nq, np] : {std::pair<std::size_t, std::size_t>{64, 129}, {128, 257}}) {
    const auto flow = build_laminar(prof, kRef, np);
    const auto pt = branch_point(flow, 1e-2, nq);
    reps.push_back(euler_residual(fields_from_height(pt.field, flow, kRef), flow, kRef));
  }
  for (const char* name : {"momentum_x", "momentum_y", "incompressibility", "vorticity"}) {
    const double ratio = reps[0].get(name).value / reps[1].get(name).value;
    INFO(name << " ratio " << ratio);
    CHECK(ratio > 3.0);
    CHECK(ratio < 5.5);
  }
}
