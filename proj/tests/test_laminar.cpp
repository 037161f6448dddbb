#include <cmath>
#include <random>

#include "doctest.h"
#include "flexwave/errors.hpp"
#include "flexwave/laminar.hpp"

using namespace flexwave;

TEST_CASE("depth integral closed forms") {
  CHECK(depth_integral(VorticityProfile::zero(-2.0), 4.0) ==
        doctest::Approx(1.0).epsilon(1e-13));
  CHECK(depth_integral(VorticityProfile::zero(-2.0), 16.0) ==
        doctest::Approx(0.5).epsilon(1e-13));
  CHECK(std::abs(depth_integral(VorticityProfile::constant(1.0, -2.0), 6.25) - 1.0) < 1e-10);
  CHECK_THROWS_AS(depth_integral(VorticityProfile::constant(1.0, -2.0), 3.9), DomainError);
}

TEST_CASE("depth integral decreases") {
  const auto prof = VorticityProfile::constant(0.7, -1.5);
  const double base = 2.0 * max_Gamma(prof);
  std::mt19937 rng(11);
  std::uniform_real_distribution<double> u(1e-3, 5.0);
  for (int i = 0; i < 50; ++i) {
    double t1 = base + u(rng), t2 = base + u(rng);
    if (t1 > t2) std::swap(t1, t2);
    if (t2 - t1 < 1e-6) continue;
    CHECK(depth_integral(prof, t1) > depth_integral(prof, t2));
  }
}

TEST_CASE("existence check") {
  auto z = check_existence(VorticityProfile::zero(-2.0), 5.0);
  CHECK(z.holds);
  CHECK(std::isinf(z.limit));
  auto neg = check_existence(VorticityProfile::constant(-1.0, -2.0), 3.0);
  CHECK_FALSE(neg.holds);
  CHECK(neg.limit == doctest::Approx(2.0).epsilon(1e-6));
  CHECK(check_existence(VorticityProfile::constant(-1.0, -2.0), 1.0).holds);
}

TEST_CASE("theta") {
  CHECK(solve_theta(VorticityProfile::zero(-2.0), {1.0, 1.0, -2.0, 0.5}) ==
        doctest::Approx(4.0).epsilon(1e-13));
  CHECK(std::abs(solve_theta(VorticityProfile::constant(1.0, -2.0), {1.0, 1.0, -2.0, 0.5}) -
                 6.25) < 1e-10);
  CHECK_THROWS_AS(solve_theta(VorticityProfile::constant(-1.0, -2.0), {1.0, 3.0, -2.0, 0.5}),
                  ConditionFailed);
  CHECK_THROWS_AS(solve_theta(VorticityProfile::zero(-1.0), {1.0, 1.0, -2.0, 0.5}),
                  DomainError);
}

TEST_CASE("laminar flow zero vorticity") {
  const PhysicalParams pp{1.0, 1.0, -2.0, 0.5};
  const auto f = build_laminar(VorticityProfile::zero(-2.0), pp);
  for (std::size_t i = 0; i < f.size(); ++i) {
    CHECK(std::abs(f.a[i] - 2.0) < 1e-13);
    CHECK(std::abs(f.H[i] - f.p[i] / 2.0) < 1e-12);
  }
  const auto c2 = cond2_value(f, pp);
  CHECK(std::abs(c2.value - 0.25) < 1e-12);
  CHECK(c2.holds);
  const auto f2 = build_laminar(VorticityProfile::zero(-1.0), {9.81, 1.0, -1.0, 1.0});
  const auto c3 = cond2_value(f2, {9.81, 1.0, -1.0, 1.0});
  CHECK(c3.value == doctest::Approx(9.81).epsilon(1e-12));
  CHECK_FALSE(c3.holds);
}

TEST_CASE("laminar flow constant vorticity") {
  const PhysicalParams pp{1.0, 1.0, -2.0, 0.5};
  const auto prof = VorticityProfile::constant(1.0, -2.0);
  const auto f = build_laminar(prof, pp);
  CHECK(std::abs(f.theta - 6.25) < 1e-10);
  for (std::size_t i = 0; i < f.size(); ++i) {
    const double a = std::sqrt(6.25 - 2.0 * (f.p[i] + 2.0));
    CHECK(std::abs(f.a[i] - a) < 1e-10);
    CHECK(std::abs(f.H[i] - (1.5 - a)) < 1e-10);
    CHECK(std::abs(f.a[i] * f.a[i] + 2.0 * eval_Gamma(prof, f.p[i]) - f.theta) < 1e-11);
    CHECK(std::abs(f.H_prime(i) * f.a[i] - 1.0) < 1e-14);
    if (i > 0) CHECK(f.H[i] > f.H[i - 1]);
  }
  CHECK(std::abs(f.H.front() + 1.0) < 1e-10);
  CHECK(f.H.back() == 0.0);
  CHECK(std::abs(cond2_value(f, pp).value - 4.0 / 15.0) < 1e-9);
}

TEST_CASE("laminar ODE form holds to second order") {
  const PhysicalParams pp{1.0, 1.0, -2.0, 0.5};
  std::vector<std::pair<double, double>> s;
  for (int i = 0; i <= 8; ++i) {
    const double p = -2.0 + 0.25 * i;
    s.emplace_back(p, 0.3 * std::sin(p));
  }
  const auto prof = VorticityProfile::tabulated(s);
  double prev = 0.0;
  for (std::size_t n : {65u, 129u}) {
    const auto f = build_laminar(prof, pp, n);
    // (1/H'^2 + 2 Gamma)' = 0 with H' from central differences of H
    double worst = 0.0;
    std::vector<double> e(n);
    for (std::size_t i = 1; i + 1 < n; ++i) {
      const double hp = (f.H[i + 1] - f.H[i - 1]) / (2.0 * f.dp());
      e[i] = 1.0 / (hp * hp) + 2.0 * eval_Gamma(prof, f.p[i]);
    }
    for (std::size_t i = 2; i + 2 < n; ++i) {
      worst = std::max(worst, std::abs(e[i + 1] - e[i - 1]) / (2.0 * f.dp()));
    }
    if (prev > 0) CHECK(prev / worst > 3.0);
    prev = worst;
  }
}
