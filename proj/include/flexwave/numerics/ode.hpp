#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <span>
#include <sstream>
#include <vector>

#include "flexwave/errors.hpp"

namespace flexwave::numerics {

struct OdeOptions {
  double abs_tol = 1e-12;
  double rel_tol = 1e-10;
  double initial_step = 0.0;  // 0 selects a step from the interval length
  long max_steps = 5'000'000;
  // When the state norm exceeds this value it is divided by it and the
  // logarithm of the factor is accumulated in OdeSolution::log_scale.
  double rescale_threshold = 1e150;
};

template <std::size_t N>
struct OdeSolution {
  using State = std::array<double, N>;
  // State at each requested output node, all expressed on the final scale:
  // true state = y * exp(log_scale).
  std::vector<State> y;
  double log_scale = 0.0;
  long steps = 0;
  long rejected = 0;
};

namespace detail {
// Dormand-Prince 5(4) tableau.
inline constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
inline constexpr double a21 = 1.0 / 5;
inline constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
inline constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
inline constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187,
                        a53 = 64448.0 / 6561, a54 = -212.0 / 729;
inline constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33,
                        a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                        a65 = -5103.0 / 18656;
inline constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192,
                        b5 = -2187.0 / 6784, b6 = 11.0 / 84;
inline constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695,
                        e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                        e6 = 22.0 / 525, e7 = -1.0 / 40;
}  // namespace detail

// Adaptive Dormand-Prince 5(4) integration of y' = rhs(t, y). The solver
// lands exactly on every node in `nodes` (monotone, nodes[0] = t0, either
// increasing or decreasing) and records the state there.
template <std::size_t N, class Rhs>
OdeSolution<N> dopri45(Rhs&& rhs, std::array<double, N> y0,
                       std::span<const double> nodes, OdeOptions opt = {}) {
  using State = std::array<double, N>;
  using namespace detail;
  OdeSolution<N> sol;
  if (nodes.empty()) return sol;
  sol.y.reserve(nodes.size());
  sol.y.push_back(y0);
  if (nodes.size() == 1) return sol;

  const double span = nodes.back() - nodes.front();
  const double dir = span >= 0 ? 1.0 : -1.0;
  double h = opt.initial_step > 0 ? opt.initial_step
                                  : std::abs(span) / (4.0 * nodes.size());
  State y = y0;
  double t = nodes.front();
  State k1 = rhs(t, y);

  auto axpy = [](const State& base, double s, std::initializer_list<std::pair<double, const State*>> terms) {
    State out = base;
    for (const auto& [c, k] : terms) {
      if (c == 0.0) continue;
      for (std::size_t i = 0; i < N; ++i) out[i] += s * c * (*k)[i];
    }
    return out;
  };

  for (std::size_t node = 1; node < nodes.size(); ++node) {
    const double target = nodes[node];
    while (dir * (target - t) > 0) {
      if (++sol.steps > opt.max_steps) {
        std::ostringstream msg;
        msg << "dopri45: step limit exceeded at t=" << t << " (h=" << h << ")";
        throw NumericalError(msg.str());
      }
      bool last = false;
      double step = dir * h;
      if (dir * (t + step - target) >= 0) {
        step = target - t;
        last = true;
      }
      const State k2 = rhs(t + c2 * step, axpy(y, step, {{a21, &k1}}));
      const State k3 = rhs(t + c3 * step, axpy(y, step, {{a31, &k1}, {a32, &k2}}));
      const State k4 = rhs(t + c4 * step, axpy(y, step, {{a41, &k1}, {a42, &k2}, {a43, &k3}}));
      const State k5 = rhs(t + c5 * step,
                           axpy(y, step, {{a51, &k1}, {a52, &k2}, {a53, &k3}, {a54, &k4}}));
      const State k6 = rhs(t + step, axpy(y, step, {{a61, &k1}, {a62, &k2}, {a63, &k3},
                                                     {a64, &k4}, {a65, &k5}}));
      const State y5 = axpy(y, step, {{b1, &k1}, {b3, &k3}, {b4, &k4}, {b5, &k5}, {b6, &k6}});
      const double tn = last ? target : t + step;
      const State k7 = rhs(tn, y5);

      double err = 0.0;
      for (std::size_t i = 0; i < N; ++i) {
        const double ei = step * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] +
                                  e5 * k5[i] + e6 * k6[i] + e7 * k7[i]);
        const double sc = opt.abs_tol +
                          opt.rel_tol * std::max(std::abs(y[i]), std::abs(y5[i]));
        err = std::max(err, std::abs(ei) / sc);
      }
      if (!std::isfinite(err)) {
        throw NumericalError("dopri45: non-finite error estimate");
      }
      if (err <= 1.0) {
        t = tn;
        y = y5;
        k1 = k7;
        double norm = 0.0;
        for (double v : y) norm = std::max(norm, std::abs(v));
        if (norm > opt.rescale_threshold) {
          const double f = 1.0 / norm;
          for (auto& v : y) v *= f;
          for (auto& v : k1) v *= f;
          for (auto& s : sol.y)
            for (auto& v : s) v *= f;
          sol.log_scale += std::log(norm);
        }
        const double fac = err == 0.0 ? 5.0 : std::min(5.0, 0.9 * std::pow(err, -0.2));
        if (!last) h = std::abs(step) * fac;
      } else {
        ++sol.rejected;
        h = std::abs(step) * std::max(0.2, 0.9 * std::pow(err, -0.2));
      }
      if (h < 1e-15 * std::max(1.0, std::abs(t))) {
        std::ostringstream msg;
        msg << "dopri45: step size underflow at t=" << t;
        throw NumericalError(msg.str());
      }
    }
    sol.y.push_back(y);
  }
  return sol;
}

}  // namespace flexwave::numerics
