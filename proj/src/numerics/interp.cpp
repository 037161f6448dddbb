#include "flexwave/numerics/interp.hpp"

#include <algorithm>
#include <cmath>

#include "flexwave/errors.hpp"

namespace flexwave::numerics {

namespace {

double segment_integral(double h, double y0, double y1, double d0, double d1,
                        double s) {
  // Integral over [0, s*h] of the Hermite cubic in local coordinate.
  const double s2 = s * s, s3 = s2 * s, s4 = s3 * s;
  const double i00 = s - s3 + 0.5 * s4;           // int 2s^3-3s^2+1
  const double i10 = 0.5 * s2 - 2.0 / 3.0 * s3 + 0.25 * s4;
  const double i01 = s3 - 0.5 * s4;
  const double i11 = -s3 / 3.0 + 0.25 * s4;
  return h * (y0 * i00 + h * d0 * i10 + y1 * i01 + h * d1 * i11);
}

}  // namespace

CubicHermite::CubicHermite(std::vector<double> x, std::vector<double> y,
                           std::vector<double> dydx)
    : x_(std::move(x)), y_(std::move(y)), d_(std::move(dydx)) {
  if (x_.size() < 2 || x_.size() != y_.size() || x_.size() != d_.size()) {
    throw DomainError("CubicHermite: need at least two consistent nodes");
  }
  for (std::size_t i = 1; i < x_.size(); ++i) {
    if (!(x_[i] > x_[i - 1])) {
      throw DomainError("CubicHermite: nodes must be strictly increasing");
    }
  }
  cumulative_.assign(x_.size(), 0.0);
  for (std::size_t i = 1; i < x_.size(); ++i) {
    cumulative_[i] = cumulative_[i - 1] +
                     segment_integral(x_[i] - x_[i - 1], y_[i - 1], y_[i],
                                      d_[i - 1], d_[i], 1.0);
  }
}

std::size_t CubicHermite::interval(double t) const {
  auto it = std::upper_bound(x_.begin(), x_.end(), t);
  std::size_t i = it == x_.begin() ? 0 : static_cast<std::size_t>(it - x_.begin()) - 1;
  return std::min(i, x_.size() - 2);
}

double CubicHermite::operator()(double t) const {
  const std::size_t i = interval(t);
  const double h = x_[i + 1] - x_[i];
  const double s = (t - x_[i]) / h;
  const double s2 = s * s, s3 = s2 * s;
  return (2 * s3 - 3 * s2 + 1) * y_[i] + (s3 - 2 * s2 + s) * h * d_[i] +
         (-2 * s3 + 3 * s2) * y_[i + 1] + (s3 - s2) * h * d_[i + 1];
}

double CubicHermite::derivative(double t) const {
  const std::size_t i = interval(t);
  const double h = x_[i + 1] - x_[i];
  const double s = (t - x_[i]) / h;
  const double s2 = s * s;
  return ((6 * s2 - 6 * s) * y_[i] + (-6 * s2 + 6 * s) * y_[i + 1]) / h +
         (3 * s2 - 4 * s + 1) * d_[i] + (3 * s2 - 2 * s) * d_[i + 1];
}

double CubicHermite::integral_to(double t) const {
  const std::size_t i = interval(t);
  const double h = x_[i + 1] - x_[i];
  return cumulative_[i] +
         segment_integral(h, y_[i], y_[i + 1], d_[i], d_[i + 1], (t - x_[i]) / h);
}

CubicHermite make_pchip(std::vector<double> x, std::vector<double> y) {
  const std::size_t n = x.size();
  if (n < 2 || y.size() != n) {
    throw DomainError("make_pchip: need at least two samples");
  }
  std::vector<double> h(n - 1), delta(n - 1), d(n, 0.0);
  for (std::size_t i = 0; i + 1 < n; ++i) {
    h[i] = x[i + 1] - x[i];
    if (!(h[i] > 0)) throw DomainError("make_pchip: nodes must be strictly increasing");
    delta[i] = (y[i + 1] - y[i]) / h[i];
  }
  if (n == 2) {
    d[0] = d[1] = delta[0];
    return CubicHermite(std::move(x), std::move(y), std::move(d));
  }
  for (std::size_t i = 1; i + 1 < n; ++i) {
    if (delta[i - 1] * delta[i] <= 0) {
      d[i] = 0.0;
    } else {
      const double w1 = 2 * h[i] + h[i - 1];
      const double w2 = h[i] + 2 * h[i - 1];
      d[i] = (w1 + w2) / (w1 / delta[i - 1] + w2 / delta[i]);
    }
  }
  auto end_slope = [](double h0, double h1, double del0, double del1) {
    double s = ((2 * h0 + h1) * del0 - h0 * del1) / (h0 + h1);
    if (s * del0 <= 0) {
      s = 0.0;
    } else if (del0 * del1 <= 0 && std::abs(s) > std::abs(3 * del0)) {
      s = 3 * del0;
    }
    return s;
  };
  d[0] = end_slope(h[0], h[1], delta[0], delta[1]);
  d[n - 1] = end_slope(h[n - 2], h[n - 3], delta[n - 2], delta[n - 3]);
  return CubicHermite(std::move(x), std::move(y), std::move(d));
}

}  // namespace flexwave::numerics
