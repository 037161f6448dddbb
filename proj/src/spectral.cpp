#include "flexwave/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "flexwave/errors.hpp"

namespace flexwave::spectral {

namespace {

constexpr double kPi = std::numbers::pi;

std::size_t half_size_to_M(std::size_t n) {
  if (n < 2) throw DomainError("spectral: need at least two half-period samples");
  return n - 1;
}

// cos(pi m / M) and sin(pi m / M) for m = 0..2M-1
struct Table {
  std::vector<double> c, s;
  explicit Table(std::size_t M) : c(2 * M), s(2 * M) {
    for (std::size_t m = 0; m < 2 * M; ++m) {
      c[m] = std::cos(kPi * static_cast<double>(m) / static_cast<double>(M));
      s[m] = std::sin(kPi * static_cast<double>(m) / static_cast<double>(M));
    }
  }
};

}  // namespace

std::vector<double> cos_coeffs(std::span<const double> f) {
  const std::size_t M = half_size_to_M(f.size());
  const Table t(M);
  const double N = 2.0 * static_cast<double>(M);
  std::vector<double> c(M + 1);
  for (std::size_t k = 0; k <= M; ++k) {
    double acc = f[0] + ((k % 2) ? -f[M] : f[M]);
    double inner = 0.0;
    for (std::size_t j = 1; j < M; ++j) inner += f[j] * t.c[(k * j) % (2 * M)];
    acc = (acc + 2.0 * inner) / N;
    c[k] = (k == 0 || k == M) ? acc : 2.0 * acc;
  }
  return c;
}

std::vector<double> cos_synth(std::span<const double> c) {
  const std::size_t M = half_size_to_M(c.size());
  const Table t(M);
  std::vector<double> f(M + 1);
  for (std::size_t j = 0; j <= M; ++j) {
    double acc = 0.0;
    for (std::size_t k = 0; k <= M; ++k) acc += c[k] * t.c[(k * j) % (2 * M)];
    f[j] = acc;
  }
  return f;
}

std::vector<double> sin_coeffs(std::span<const double> g) {
  const std::size_t M = half_size_to_M(g.size());
  const Table t(M);
  const double N = 2.0 * static_cast<double>(M);
  std::vector<double> s(M + 1, 0.0);
  for (std::size_t k = 1; k < M; ++k) {
    double acc = 0.0;
    for (std::size_t j = 1; j < M; ++j) acc += g[j] * t.s[(k * j) % (2 * M)];
    s[k] = 4.0 * acc / N;
  }
  return s;
}

std::vector<double> sin_synth(std::span<const double> s) {
  const std::size_t M = half_size_to_M(s.size());
  const Table t(M);
  std::vector<double> g(M + 1, 0.0);
  for (std::size_t j = 1; j < M; ++j) {
    double acc = 0.0;
    for (std::size_t k = 1; k < M; ++k) acc += s[k] * t.s[(k * j) % (2 * M)];
    g[j] = acc;
  }
  return g;
}

double mean(std::span<const double> f) {
  const std::size_t M = half_size_to_M(f.size());
  double acc = 0.5 * (f[0] + f[M]);
  for (std::size_t j = 1; j < M; ++j) acc += f[j];
  return acc / static_cast<double>(M);
}

std::vector<double> even_derivative(std::span<const double> f) {
  auto c = cos_coeffs(f);
  const std::size_t M = c.size() - 1;
  std::vector<double> s(M + 1, 0.0);
  for (std::size_t k = 1; k < M; ++k) s[k] = -2.0 * kPi * static_cast<double>(k) * c[k];
  return sin_synth(s);
}

std::vector<double> even_second_derivative(std::span<const double> f) {
  auto c = cos_coeffs(f);
  c[0] = 0.0;
  for (std::size_t k = 1; k < c.size(); ++k) {
    const double w = 2.0 * kPi * static_cast<double>(k);
    c[k] *= -w * w;
  }
  return cos_synth(c);
}

std::vector<double> odd_derivative(std::span<const double> g) {
  auto s = sin_coeffs(g);
  std::vector<double> c(s.size(), 0.0);
  for (std::size_t k = 1; k + 1 < s.size(); ++k) c[k] = 2.0 * kPi * static_cast<double>(k) * s[k];
  return cos_synth(c);
}

std::vector<double> odd_antiderivative(std::span<const double> g) {
  auto s = sin_coeffs(g);
  std::vector<double> c(s.size(), 0.0);
  for (std::size_t k = 1; k + 1 < s.size(); ++k) {
    const double w = 2.0 * kPi * static_cast<double>(k);
    c[k] = -s[k] / w;
    c[0] += s[k] / w;
  }
  return cos_synth(c);
}

std::vector<double> even_antiderivative(std::span<const double> f) {
  auto c = cos_coeffs(f);
  const std::size_t M = c.size() - 1;
  std::vector<double> s(M + 1, 0.0);
  for (std::size_t k = 1; k < M; ++k) s[k] = c[k] / (2.0 * kPi * static_cast<double>(k));
  return sin_synth(s);
}

std::vector<double> even_double_antiderivative(std::span<const double> f) {
  auto c = cos_coeffs(f);
  c[0] = 0.0;
  for (std::size_t k = 1; k < c.size(); ++k) {
    const double w = 2.0 * kPi * static_cast<double>(k);
    c[k] = -c[k] / (w * w);
    c[0] -= c[k];
  }
  return cos_synth(c);
}

std::vector<double> full_from_even(std::span<const double> half) {
  const std::size_t M = half_size_to_M(half.size());
  std::vector<double> out(2 * M);
  for (std::size_t j = 0; j < 2 * M; ++j) out[j] = half[j <= M ? j : 2 * M - j];
  return out;
}

std::vector<double> full_from_odd(std::span<const double> half) {
  const std::size_t M = half_size_to_M(half.size());
  std::vector<double> out(2 * M);
  for (std::size_t j = 0; j < 2 * M; ++j) out[j] = j <= M ? half[j] : -half[2 * M - j];
  return out;
}

std::vector<double> periodic_derivative(std::span<const double> f, int order) {
  const std::size_t N = f.size();
  if (N < 2 || N % 2 != 0) throw DomainError("spectral: periodic data needs an even sample count");
  if (order < 0) throw DomainError("spectral: negative derivative order");
  std::vector<double> c(N), s(N);
  for (std::size_t m = 0; m < N; ++m) {
    c[m] = std::cos(2.0 * kPi * static_cast<double>(m) / static_cast<double>(N));
    s[m] = std::sin(2.0 * kPi * static_cast<double>(m) / static_cast<double>(N));
  }
  const std::size_t M = N / 2;
  std::vector<double> a(M + 1, 0.0), b(M + 1, 0.0);
  for (std::size_t k = 0; k <= M; ++k) {
    for (std::size_t j = 0; j < N; ++j) {
      a[k] += f[j] * c[(k * j) % N];
      b[k] += f[j] * s[(k * j) % N];
    }
    const double w = (k == 0 || k == M) ? 1.0 / N : 2.0 / N;
    a[k] *= w;
    b[k] *= w;
  }
  // d/dq maps (a, b) -> w (b, -a); apply order times
  std::vector<double> out(N, 0.0);
  for (std::size_t k = 1; k <= M; ++k) {
    if (k == M && order % 2 == 1) continue;
    const double w = 2.0 * kPi * static_cast<double>(k);
    double ak = a[k], bk = b[k];
    for (int r = 0; r < order; ++r) {
      const double na = w * bk, nb = -w * ak;
      ak = na;
      bk = nb;
    }
    for (std::size_t j = 0; j < N; ++j) out[j] += ak * c[(k * j) % N] + bk * s[(k * j) % N];
  }
  if (order == 0) {
    for (std::size_t j = 0; j < N; ++j) out[j] += a[0];
  }
  return out;
}

double tail_ratio(std::span<const double> c) {
  double all = 0.0;
  double tail = 0.0;
  const std::size_t start = c.size() - c.size() / 4;
  for (std::size_t k = 0; k < c.size(); ++k) {
    all = std::max(all, std::abs(c[k]));
    if (k >= start) tail = std::max(tail, std::abs(c[k]));
  }
  return all == 0.0 ? 0.0 : tail / all;
}

}  // namespace flexwave::spectral
