#include "flexwave/numerics/quadrature.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <queue>
#include <stdexcept>
#include <vector>

namespace flexwave::numerics {

namespace {

double simpson_recurse(const ScalarFn& f, double a, double b, double fa,
                       double fm, double fb, double whole, double eps,
                       int depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m);
  const double rm = 0.5 * (m + b);
  const double flm = f(lm);
  const double frm = f(rm);
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  const double delta = left + right - whole;
  if (depth <= 0 || std::abs(delta) <= 15.0 * eps) {
    return left + right + delta / 15.0;
  }
  return simpson_recurse(f, a, m, fa, flm, fm, left, 0.5 * eps, depth - 1) +
         simpson_recurse(f, m, b, fm, frm, fb, right, 0.5 * eps, depth - 1);
}

// Kronrod 15-point abscissae/weights and embedded Gauss 7-point weights.
constexpr std::array<double, 8> kXgk = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
constexpr std::array<double, 8> kWgk = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
constexpr std::array<double, 4> kWg = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Panel {
  double a, b, value, error;
  bool operator<(const Panel& o) const { return error < o.error; }
};

Panel kronrod_panel(const ScalarFn& f, double a, double b) {
  const double c = 0.5 * (a + b);
  const double h = 0.5 * (b - a);
  const double fc = f(c);
  double resk = fc * kWgk[7];
  double resg = fc * kWg[3];
  for (int j = 0; j < 7; ++j) {
    const double dx = h * kXgk[j];
    const double fsum = f(c - dx) + f(c + dx);
    resk += kWgk[j] * fsum;
    if (j % 2 == 1) resg += kWg[j / 2] * fsum;
  }
  return {a, b, resk * h, std::abs((resk - resg) * h)};
}

}  // namespace

double adaptive_simpson(const ScalarFn& f, double a, double b,
                        QuadratureTol tol, int max_depth) {
  if (a == b) return 0.0;
  const double fa = f(a);
  const double fb = f(b);
  const double fm = f(0.5 * (a + b));
  const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  const double eps = std::max(tol.abs, tol.rel * std::abs(whole));
  return simpson_recurse(f, a, b, fa, fm, fb, whole, eps, max_depth);
}

double gauss_kronrod(const ScalarFn& f, double a, double b, QuadratureTol tol,
                     int max_intervals) {
  if (a == b) return 0.0;
  std::priority_queue<Panel> heap;
  Panel first = kronrod_panel(f, a, b);
  double total = first.value;
  double err = first.error;
  heap.push(first);
  int count = 1;
  while (err > std::max(tol.abs, tol.rel * std::abs(total)) &&
         count < max_intervals) {
    Panel worst = heap.top();
    heap.pop();
    const double m = 0.5 * (worst.a + worst.b);
    if (m <= worst.a || m >= worst.b) {
      heap.push(worst);
      break;
    }
    Panel l = kronrod_panel(f, worst.a, m);
    Panel r = kronrod_panel(f, m, worst.b);
    total += l.value + r.value - worst.value;
    err += l.error + r.error - worst.error;
    heap.push(l);
    heap.push(r);
    ++count;
  }
  // Re-sum in a fixed order to remove drift from the running updates.
  double sum = 0.0;
  std::vector<Panel> panels;
  panels.reserve(heap.size());
  while (!heap.empty()) {
    panels.push_back(heap.top());
    heap.pop();
  }
  std::sort(panels.begin(), panels.end(),
            [](const Panel& x, const Panel& y) { return x.a < y.a; });
  for (const auto& p : panels) sum += p.value;
  return sum;
}

double simpson_samples(std::span<const double> y, double h) {
  const std::size_t n = y.size();
  if (n < 2) return 0.0;
  if (n == 2) return 0.5 * h * (y[0] + y[1]);
  std::size_t intervals = n - 1;
  double sum = 0.0;
  std::size_t end = n - 1;
  if (intervals % 2 == 1) {
    // Simpson 3/8 on the last three intervals.
    const std::size_t k = n - 4;
    sum += 3.0 * h / 8.0 * (y[k] + 3.0 * y[k + 1] + 3.0 * y[k + 2] + y[k + 3]);
    end = k;
  }
  for (std::size_t i = 0; i + 2 <= end; i += 2) {
    sum += h / 3.0 * (y[i] + 4.0 * y[i + 1] + y[i + 2]);
  }
  return sum;
}

double trapezoid_samples(std::span<const double> y, double h) {
  if (y.size() < 2) return 0.0;
  double sum = 0.5 * (y.front() + y.back());
  for (std::size_t i = 1; i + 1 < y.size(); ++i) sum += y[i];
  return sum * h;
}

}  // namespace flexwave::numerics
