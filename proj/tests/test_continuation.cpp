#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"
#include "flexwave/continuation.hpp"
#include "flexwave/errors.hpp"
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

// Smooth even direction vanishing on the bed.
HeightField sample_direction(const LaminarFlow& flow, std::size_t n_q, double lambda) {
  HeightField h = HeightField::zero(n_q, flow.size(), lambda);
  for (std::size_t i = 0; i < flow.size(); ++i) {
    const double p = flow.p[i], z = p - flow.p.front();
    for (std::size_t j = 0; j < h.cols(); ++j) {
      const double q = static_cast<double>(j) / n_q;
      h(i, j) = z * (1.0 + 0.3 * p) * (std::cos(2 * kPi * q) + 0.5 * std::cos(4 * kPi * q)) +
                0.2 * z * z * std::cos(6 * kPi * q);
    }
  }
  return h;
}

HeightField scaled(HeightField h, double c) {
  for (auto& v : h.w) v *= c;
  return h;
}

// Cosine coefficients of each interior row of a grid laid out like HeightField.
std::vector<std::vector<double>> row_coeffs(const std::vector<double>& g, std::size_t cols) {
  std::vector<std::vector<double>> out;
  for (std::size_t r = 0; r * cols < g.size(); ++r) {
    std::vector<double> row(g.begin() + static_cast<std::ptrdiff_t>(r * cols),
                            g.begin() + static_cast<std::ptrdiff_t>((r + 1) * cols));
    out.push_back(spectral::cos_coeffs(row));
  }
  return out;
}

}  // namespace

TEST_CASE("laminar state solves F for every wavelength") {
  std::mt19937 rng(7);
  std::uniform_real_distribution<double> U(0.1, 10.0);
  for (const auto& prof : profiles()) {
    const auto flow = build_laminar(prof, kRef, 129);
    for (int t = 0; t < 10; ++t) {
      const auto f = HeightField::zero(32, flow.size(), U(rng));
      CHECK(residual_F(f, flow, kRef).max_norm() < 1e-11);
    }
  }
}

TEST_CASE("admissible set") {
  const auto flow = build_laminar(VorticityProfile::zero(-2.0), kRef, 65);
  auto f = HeightField::zero(16, flow.size(), 1.0);
  CHECK(in_admissible_set(f, flow));
  for (std::size_t j = 0; j < f.cols(); ++j) f(flow.size() - 1, j) = -1.0;
  CHECK_FALSE(in_admissible_set(f, flow));
  CHECK_THROWS_AS(residual_F(f, flow, kRef), DomainError);
}

TEST_CASE("interior residual of a sinh mode without vorticity") {
  const auto flow = build_laminar(VorticityProfile::zero(-2.0), kRef, 257);
  const double eps = 1e-6;
  auto dir = HeightField::zero(32, flow.size(), 1.0);
  for (std::size_t i = 0; i < flow.size(); ++i) {
    for (std::size_t j = 0; j < dir.cols(); ++j) {
      dir(i, j) = std::sinh(flow.p[i] + 2.0) * std::cos(2 * kPi * j / 32.0);
    }
  }
  const auto r1 = residual_F(scaled(dir, eps), flow, kRef);
  const auto r2 = residual_F(scaled(dir, 2 * eps), flow, kRef);
  double err = 0.0;
  for (std::size_t i = 1; i + 1 < flow.size(); ++i) {
    for (std::size_t j = 0; j < dir.cols(); ++j) {
      const double exact = (1 - kPi * kPi) * dir(i, j);
      const std::size_t k = (i - 1) * dir.cols() + j;
      const double lin = (2 * r1.interior[k] - 0.5 * r2.interior[k]) / eps;
      err = std::max(err, std::abs(lin - exact));
    }
  }
  CHECK(err < 1e-4);
}

TEST_CASE("linearization: mode decoupling") {
  for (const auto& prof : profiles()) {
    const auto flow = build_laminar(prof, kRef, 129);
    for (int k : {1, 2, 5}) {
      auto dir = HeightField::zero(32, flow.size(), 2.3);
      for (std::size_t i = 0; i < flow.size(); ++i) {
        const double z = flow.p[i] + 2.0;
        for (std::size_t j = 0; j < dir.cols(); ++j) {
          dir(i, j) = z * std::exp(0.3 * z) * std::cos(2 * kPi * k * j / 32.0);
        }
      }
      const auto img = apply_LT(dir, flow, kRef, 2.3);
      const auto rc = row_coeffs(img.Lh, dir.cols());
      double on = 0.0, off = 0.0;
      for (const auto& c : rc) {
        for (std::size_t m = 0; m < c.size(); ++m) {
          (m == static_cast<std::size_t>(k) ? on : off) =
              std::max(m == static_cast<std::size_t>(k) ? on : off, std::abs(c[m]));
        }
      }
      CHECK(on > 1e-3);
      CHECK(off < 1e-12 * std::max(1.0, on));
      const auto tc = spectral::cos_coeffs(img.Th.half);
      for (std::size_t m = 0; m < tc.size(); ++m) {
        if (m != static_cast<std::size_t>(k)) CHECK(std::abs(tc[m]) < 1e-12);
      }
    }
  }
}

TEST_CASE("linearization: k = 2 interior rows reduce to the Sturm-Liouville equation") {
  for (const auto& prof : profiles()) {
    double prev = 0.0;
    for (std::size_t n : {129u, 257u}) {
      const auto flow = build_laminar(prof, kRef, n);
      const auto bif = bifurcation_point(flow, kRef);
      const double ls = bif.lambda_star, mu = 16 * kPi * kPi;
      const auto shot = shoot_f1(flow, ls, mu);
      auto dir = HeightField::zero(32, n, ls);
      for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < dir.cols(); ++j) {
          dir(i, j) = shot.f[i] * std::cos(4 * kPi * j / 32.0);
        }
      }
      const auto img = apply_LT(dir, flow, kRef, ls);
      const double res = max_abs(img.Lh) / max_abs(shot.f);
      CHECK(res < 5e-2);
      if (prev > 0) CHECK(prev / res == doctest::Approx(4.0).epsilon(0.15));
      prev = res;
    }
  }
}

TEST_CASE("linearization: directional derivative consistency") {
  for (const auto& prof : profiles()) {
    const auto flow = build_laminar(prof, kRef, 129);
    const double lam = 3.1;
    const auto dir = sample_direction(flow, 32, lam);
    const auto lin = apply_LT(dir, flow, kRef, lam);
    auto err = [&](double eps) {
      const auto r = residual_F(scaled(dir, eps), flow, kRef);
      double e = 0.0;
      for (std::size_t k = 0; k < r.interior.size(); ++k) {
        e = std::max(e, std::abs(r.interior[k] / eps - lin.Lh[k]));
      }
      for (std::size_t j = 0; j < r.boundary.half.size(); ++j) {
        e = std::max(e, std::abs(r.boundary.half[j] / eps - lin.Th.half[j]));
      }
      return e;
    };
    const double e1 = err(1e-4), e2 = err(5e-5);
    CHECK(e1 < 1e-2 * std::max(max_abs(lin.Lh), max_abs(lin.Th.half)));
    CHECK(e1 / e2 == doctest::Approx(2.0).epsilon(0.1));
  }
}

TEST_CASE("kernel structure") {
  std::mt19937 rng(11);
  for (const auto& prof : profiles()) {
    double sig_prev = 0.0;
    for (std::size_t n : {129u, 257u}) {
      const auto flow = build_laminar(prof, kRef, n);
      const auto bif = bifurcation_point(flow, kRef);
      const double ls = bif.lambda_star;

      const auto k1 = kernel_at(ls, flow, kRef, 32);
      REQUIRE(k1.dimension == 1);
      CHECK(k1.null_modes.front() == 1);
      const auto k2 = kernel_at(2 * ls, flow, kRef, 32);
      REQUIRE(k2.dimension == 1);
      CHECK(k2.null_modes.front() == 2);

      if (n == 257) {
        const auto h = shooting_kernel(bif, flow, 32);
        CHECK(std::abs(inner_product(k1.kernel, h, flow.dp())) >= 0.999);
      }
      const double sig = k1.sigma_min[1];
      if (sig_prev > 0) CHECK(sig_prev / sig == doctest::Approx(4.0).epsilon(0.15));
      sig_prev = sig;

      std::uniform_real_distribution<double> U(0.3, 4.5);
      int tested = 0;
      while (tested < 20) {
        const double r = U(rng);
        const double nearest = std::max(1.0, std::round(r));
        if (std::abs(r - nearest) < 0.1 * nearest) continue;
        CHECK(kernel_at(r * ls, flow, kRef, 32).dimension == 0);
        ++tested;
      }
    }
  }
}

TEST_CASE("discrete wavelength and kernel") {
  for (const auto& prof : profiles()) {
    const auto flow = build_laminar(prof, kRef, 129);
    const auto bif = bifurcation_point(flow, kRef);
    const double lh = discrete_lambda_star(flow, kRef, bif.lambda_star, 1);
    CHECK(std::abs(lh / bif.lambda_star - 1) < 1e-3);
    CHECK(discrete_lambda_star(flow, kRef, 2 * bif.lambda_star, 2) ==
          doctest::Approx(2 * lh).epsilon(1e-12));
    const auto h = discrete_kernel(flow, kRef, 32, lh);
    const auto img = apply_LT(h, flow, kRef, lh);
    CHECK(max_abs(img.Lh) < 1e-8);
    CHECK(max_abs(img.Th.half) < 1e-8);
    CHECK(inner_product(h, h, flow.dp()) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(h(flow.size() - 1, 0) > 0);
  }
}

TEST_CASE("transversality") {
  for (const auto& prof : profiles()) {
    const auto flow = build_laminar(prof, kRef, 257);
    const auto bif = bifurcation_point(flow, kRef);
    const auto t = transversality(flow, kRef, bif, 32);
    CHECK(t.quadrature < 0);
    CHECK(t.closed_form < 0);
    CHECK(std::abs(t.quadrature - t.closed_form) <= 1e-7 * std::abs(t.closed_form));
  }
}

TEST_CASE("range functional vanishes on the range") {
  for (const auto& prof : profiles()) {
    const auto flow = build_laminar(prof, kRef, 257);
    const auto bif = bifurcation_point(flow, kRef);
    const double ls = bif.lambda_star;
    const std::size_t n = flow.size(), nq = 32, c = nq / 2 + 1;
    const double scale = std::abs(transversality(flow, kRef, bif, nq).closed_form);
    for (int variant = 0; variant < 3; ++variant) {
      // g quadratic with g(p0) = 0, so the one-sided surface slope is exact
      const double b = 0.3 * variant - 0.4;
      auto g = [&](double p) { return (p + 2.0) * (1.0 + b * (p + 2.0)); };
      auto gp = [&](double p) { return 1.0 + 2.0 * b * (p + 2.0); };
      const double gpp = 2.0 * b;
      auto dir = HeightField::zero(nq, n, ls);
      std::vector<double> F(n * c);
      for (std::size_t i = 0; i < n; ++i) {
        const double p = flow.p[i], Hp = flow.H_prime(i);
        const double Lg = ls * ls * gpp - 3 * ls * ls * flow.gamma[i] * Hp * Hp * gp(p) -
                          4 * kPi * kPi * Hp * Hp * g(p);
        for (std::size_t j = 0; j < c; ++j) {
          const double cq = std::cos(2 * kPi * j / nq);
          dir(i, j) = g(p) * cq;
          F[i * c + j] = Lg * cq;
        }
      }
      const auto img = apply_LT(dir, flow, kRef, ls);
      const double val = range_functional(bif, flow, kRef, F, img.Th);
      CHECK(std::abs(val) < 1e-7 * scale);
    }
  }
}

TEST_CASE("Newton: trivial amplitude") {
  const auto flow = build_laminar(VorticityProfile::constant(1.0, -2.0), kRef, 129);
  const auto bif = bifurcation_point(flow, kRef);
  const auto h = shooting_kernel(bif, flow, 32);
  const auto r = newton_solve(HeightField::zero(32, flow.size(), 3.0), 0.0, h, flow, kRef);
  CHECK(r.iterations <= 1);
  CHECK(r.field.lambda == 3.0);
  CHECK(max_abs(r.field.w) == 0.0);
}

TEST_CASE("Newton: opposite amplitudes are half-period shifts") {
  const auto flow = build_laminar(tabulated_profile(), kRef, 129);
  const auto bif = bifurcation_point(flow, kRef);
  const double lh = discrete_lambda_star(flow, kRef, bif.lambda_star);
  const auto h = discrete_kernel(flow, kRef, 32, lh);
  const double s = 1e-3;
  auto solve = [&](double amp) {
    auto guess = scaled(h, amp);
    guess.lambda = lh;
    return newton_solve(guess, amp, h, flow, kRef);
  };
  const auto plus = solve(s), minus = solve(-s);
  CHECK(plus.residual < 1e-10);
  CHECK(minus.residual < 1e-10);
  CHECK(std::abs(plus.field.lambda - minus.field.lambda) < 1e-10);
  const std::size_t M = h.M();
  double d = 0.0, dev = 0.0;
  for (std::size_t i = 0; i < flow.size(); ++i) {
    for (std::size_t j = 0; j <= M; ++j) {
      d = std::max(d, std::abs(minus.field(i, j) - plus.field(i, M - j)));
      dev = std::max(dev, std::abs(plus.field(i, j) - s * h(i, j)));
    }
  }
  CHECK(d < 1e-12);
  CHECK(dev / s < 50 * s);
  CHECK(inner_product(plus.field, h, flow.dp()) == doctest::Approx(s).epsilon(1e-9));
}

TEST_CASE("branch near the bifurcation point") {
  for (const auto& prof : profiles()) {
    const auto flow = build_laminar(prof, kRef, 129);
    const auto bif = bifurcation_point(flow, kRef);
    const auto br = continue_branch(bif, 1e-3, 4, flow, kRef, 32);
    REQUIRE(br.complete);
    REQUIRE(br.points.size() == 5);
    CHECK(br.points.front().lambda == br.lambda_star_h);
    const double nh = std::sqrt(inner_product(br.kernel, br.kernel, flow.dp()));
    std::vector<double> x, y, dl;
    for (const auto& pt : br.points) {
      CHECK(pt.residual_norm < 1e-10);
      CHECK(std::abs(spectral::mean(pt.field.row(flow.size() - 1))) < 1e-11);
      CHECK(in_admissible_set(pt.field, flow));
      if (pt.s == 0) continue;
      auto d = scaled(pt.field, 1.0 / pt.s);
      for (std::size_t k = 0; k < d.w.size(); ++k) d.w[k] -= br.kernel.w[k];
      x.push_back(pt.s);
      y.push_back(std::sqrt(inner_product(d, d, flow.dp())) / nh);
      dl.push_back(std::abs(pt.lambda - br.lambda_star_h));
      CHECK(inner_product(pt.field, br.kernel, flow.dp()) == doctest::Approx(pt.s).epsilon(1e-9));
    }
    // ||w/s - h*|| shrinks linearly; lambda is even in s, so its shift is quadratic
    for (std::size_t k = 1; k < x.size(); ++k) {
      const double r = x[k] / x[0];
      CHECK(y[k] / y[0] == doctest::Approx(r).epsilon(0.05));
      CHECK(dl[k] / dl[0] == doctest::Approx(r * r).epsilon(0.05));
    }
  }
}

TEST_CASE("branch with no steps holds the trivial point") {
  const auto flow = build_laminar(VorticityProfile::zero(-2.0), kRef, 65);
  const auto bif = bifurcation_point(flow, kRef);
  const auto br = continue_branch(bif, 1e-3, 0, flow, kRef, 16);
  CHECK(br.complete);
  CHECK(br.points.size() == 1);
  CHECK(br.points.front().s == 0.0);
}

TEST_CASE("branch truncates when the trust region is too large") {
  const auto flow = build_laminar(VorticityProfile::zero(-2.0), kRef, 65);
  const auto bif = bifurcation_point(flow, kRef);
  const auto br = continue_branch(bif, 5.0, 2, flow, kRef, 16);
  CHECK_FALSE(br.complete);
  CHECK(br.points.size() < 3);
  CHECK(br.note.find("truncated") != std::string::npos);
}
