#include "flexwave/reconstruct.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "flexwave/errors.hpp"
#include "flexwave/spectral.hpp"

namespace flexwave {

namespace {

double max_abs(const std::vector<double>& v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

double periodic_mean(std::span<const double> f) {
  double s = 0.0;
  for (double x : f) s += x;
  return s / static_cast<double>(f.size());
}

// p-derivative of a row-major (n_p x n_q) grid: central inside, one-sided
// second order on the end rows.
std::vector<double> d_p(const std::vector<double>& f, std::size_t n, std::size_t c, double dp) {
  std::vector<double> out(n * c);
  for (std::size_t j = 0; j < c; ++j) {
    auto at = [&](std::size_t i) { return f[i * c + j]; };
    out[j] = (-3.0 * at(0) + 4.0 * at(1) - at(2)) / (2.0 * dp);
    out[(n - 1) * c + j] = (3.0 * at(n - 1) - 4.0 * at(n - 2) + at(n - 3)) / (2.0 * dp);
    for (std::size_t i = 1; i + 1 < n; ++i) out[i * c + j] = (at(i + 1) - at(i - 1)) / (2.0 * dp);
  }
  return out;
}

// Second p-derivative on interior rows (end rows left at zero).
std::vector<double> d_pp(const std::vector<double>& f, std::size_t n, std::size_t c, double dp) {
  std::vector<double> out(n * c, 0.0);
  for (std::size_t i = 1; i + 1 < n; ++i) {
    for (std::size_t j = 0; j < c; ++j) {
      out[i * c + j] = (f[(i + 1) * c + j] - 2.0 * f[i * c + j] + f[(i - 1) * c + j]) / (dp * dp);
    }
  }
  return out;
}

std::vector<double> d_q(const std::vector<double>& f, std::size_t n, std::size_t c, int order) {
  std::vector<double> out(n * c);
  for (std::size_t i = 0; i < n; ++i) {
    const auto d = spectral::periodic_derivative(
        std::span<const double>(f.data() + i * c, c), order);
    std::copy(d.begin(), d.end(), out.begin() + static_cast<std::ptrdiff_t>(i * c));
  }
  return out;
}

// h_p to fourth order (five-point stencils, one-sided near the ends), so that
// fields built from it can be differentiated again without losing an order.
std::vector<double> hp_fourth_order(const HeightField& f, const LaminarFlow& flow) {
  const std::size_t n = f.n_p, c = f.cols();
  const double dp = flow.dp();
  std::vector<double> out(n * c);
  for (std::size_t j = 0; j < c; ++j) {
    auto w = [&](std::size_t i) { return f(i, j); };
    for (std::size_t i = 0; i < n; ++i) {
      double d;
      if (i >= 2 && i + 2 < n) {
        d = (-w(i + 2) + 8 * w(i + 1) - 8 * w(i - 1) + w(i - 2)) / (12 * dp);
      } else if (i < 2) {
        d = i == 0 ? (-25 * w(0) + 48 * w(1) - 36 * w(2) + 16 * w(3) - 3 * w(4)) / (12 * dp)
                   : (-3 * w(0) - 10 * w(1) + 18 * w(2) - 6 * w(3) + w(4)) / (12 * dp);
      } else {
        const std::size_t m = n - 1;
        d = i == m ? (25 * w(m) - 48 * w(m - 1) + 36 * w(m - 2) - 16 * w(m - 3) + 3 * w(m - 4)) / (12 * dp)
                   : (3 * w(m) + 10 * w(m - 1) - 18 * w(m - 2) + 6 * w(m - 3) - w(m - 4)) / (12 * dp);
      }
      out[i * c + j] = flow.H_prime(i) + d;
    }
  }
  return out;
}

}  // namespace

double bernoulli_Q(const HeightField& field, const LaminarFlow& flow) {
  if (field.n_p != flow.size() || field.n_p < 5) throw DomainError("bernoulli_Q: grid mismatch");
  const auto hp = hp_fourth_order(field, flow);
  const std::size_t top = field.n_p - 1, c = field.cols();
  const auto h0 = field.row(top);
  const auto hq = spectral::even_derivative(h0);
  const double l2 = field.lambda * field.lambda;
  std::vector<double> g(c);
  for (std::size_t j = 0; j < c; ++j) {
    const double s = hp[top * c + j];
    g[j] = (l2 + hq[j] * hq[j]) / (s * s) / l2;
  }
  return spectral::mean(g);
}

WaveSolution fields_from_height(const HeightField& field, const LaminarFlow& flow,
                                const PhysicalParams& params) {
  if (field.n_p != flow.size() || field.n_p < 5) {
    throw DomainError("fields_from_height: grid mismatch");
  }
  const std::size_t n = field.n_p, c = field.cols(), N = field.n_q;
  const auto hp_half = hp_fourth_order(field, flow);
  for (double v : hp_half) {
    if (!(v > 0)) throw DomainError("fields_from_height: h_p must be positive");
  }
  WaveSolution s;
  s.lambda = field.lambda;
  s.n_q = N;
  s.n_p = n;
  s.p = flow.p;
  s.x.resize(N);
  for (std::size_t j = 0; j < N; ++j) s.x[j] = s.lambda * static_cast<double>(j) / N;
  s.Q = bernoulli_Q(field, flow);
  s.E = 0.5 * s.Q;
  s.y.resize(n * N);
  s.u.resize(n * N);
  s.v.resize(n * N);
  s.P.resize(n * N);
  const double a0 = flow.a.back();
  for (std::size_t i = 0; i < n; ++i) {
    const auto w = field.row(i);
    const auto wf = spectral::full_from_even(w);
    const auto hq = spectral::full_from_odd(spectral::even_derivative(w));
    const auto hp = spectral::full_from_even(
        std::span<const double>(hp_half.data() + i * c, c));
    const double corr = 0.5 * (flow.a[i] * flow.a[i] - a0 * a0);  // Gamma(0) - Gamma(p)
    for (std::size_t j = 0; j < N; ++j) {
      const std::size_t k = s.idx(i, j);
      s.y[k] = flow.H[i] + wf[j];
      s.u[k] = -1.0 / hp[j];
      s.v[k] = -hq[j] / (s.lambda * hp[j]);
      s.P[k] = s.E - 0.5 * (s.u[k] * s.u[k] + s.v[k] * s.v[k]) - params.g * s.y[k] + corr;
    }
  }
  s.eta.assign(s.y.begin() + static_cast<std::ptrdiff_t>((n - 1) * N), s.y.end());
  return s;
}

std::vector<double> bending_operator(std::span<const double> eta, double lambda) {
  const std::size_t N = eta.size();
  auto dx = [&](const std::vector<double>& f, int order) {
    auto d = spectral::periodic_derivative(f, order);
    const double sc = std::pow(lambda, -order);
    for (auto& v : d) v *= sc;
    return d;
  };
  const std::vector<double> e(eta.begin(), eta.end());
  const auto ex = dx(e, 1), exx = dx(e, 2);
  std::vector<double> om(N), A(N), B(N), out(N);
  for (std::size_t j = 0; j < N; ++j) {
    om[j] = std::sqrt(1.0 + ex[j] * ex[j]);
    A[j] = exx[j] / (om[j] * om[j] * om[j]);
  }
  const auto Ax = dx(A, 1);
  for (std::size_t j = 0; j < N; ++j) B[j] = Ax[j] / om[j];
  const auto Bx = dx(B, 1);
  for (std::size_t j = 0; j < N; ++j) out[j] = Bx[j] / om[j] + 0.5 * A[j] * A[j] * A[j];
  return out;
}

bool ResidualReport::all_pass() const {
  return std::all_of(entries.begin(), entries.end(), [](const auto& e) { return e.pass(); });
}

const ResidualEntry* ResidualReport::first_failure() const {
  for (const auto& e : entries) {
    if (!e.pass()) return &e;
  }
  return nullptr;
}

const ResidualEntry& ResidualReport::get(const std::string& name) const {
  for (const auto& e : entries) {
    if (e.name == name) return e;
  }
  throw std::out_of_range("no residual named " + name);
}

double grid_tolerance(double dp, double eta_amplitude) {
  return 1e-9 + kGridTolConstant * eta_amplitude * dp * dp;
}

ResidualReport euler_residual(const WaveSolution& s, const LaminarFlow& flow,
                              const PhysicalParams& params) {
  const std::size_t n = s.n_p, N = s.n_q;
  if (n != flow.size() || n < 5) throw DomainError("euler_residual: grid mismatch");
  if (s.y.size() != n * N || s.u.size() != n * N || s.v.size() != n * N ||
      s.P.size() != n * N || s.eta.size() != N) {
    throw DomainError("euler_residual: inconsistent field sizes");
  }
  const double dp = flow.dp(), lam = s.lambda, g = params.g;

  // split each field into its laminar part (exact p-derivatives) and the rest
  std::vector<double> dy(n * N), du(n * N), dP(n * N);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < N; ++j) {
      const std::size_t k = s.idx(i, j);
      dy[k] = s.y[k] - flow.H[i];
      du[k] = s.u[k] + flow.a[i];
      dP[k] = s.P[k] + g * flow.H[i];
    }
  }
  const auto hq = d_q(dy, n, N, 1), hqq = d_q(dy, n, N, 2);
  auto hp = d_p(dy, n, N, dp), hpp = d_pp(dy, n, N, dp);
  const auto hpq = d_q(hp, n, N, 1);
  const auto uq = d_q(du, n, N, 1), vq = d_q(s.v, n, N, 1), Pq = d_q(dP, n, N, 1);
  auto up = d_p(du, n, N, dp), Pp = d_p(dP, n, N, dp);
  const auto vp = d_p(s.v, n, N, dp);
  for (std::size_t i = 0; i < n; ++i) {
    const double a = flow.a[i], gam = flow.gamma[i];
    for (std::size_t j = 0; j < N; ++j) {
      const std::size_t k = s.idx(i, j);
      hp[k] += 1.0 / a;
      hpp[k] += gam / (a * a * a);
      up[k] += gam / a;
      Pp[k] += -g / a;
    }
  }

  double mx = 0, my = 0, cont = 0, vort = 0, stream = 0, height = 0, energy = 0, umax = -1e300;
  const double a0 = flow.a.back();
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < N; ++j) {
      const std::size_t k = s.idx(i, j);
      const double r = hq[k] / hp[k];
      auto ddx = [&](double fq, double fp) { return (fq - fp * r) / lam; };
      auto ddy = [&](double fp) { return fp / hp[k]; };
      const double ux = ddx(uq[k], up[k]), uy = ddy(up[k]);
      const double vx = ddx(vq[k], vp[k]), vy = ddy(vp[k]);
      const double Px = ddx(Pq[k], Pp[k]), Py = ddy(Pp[k]);
      const double u = s.u[k], v = s.v[k];
      mx = std::max(mx, std::abs(u * ux + v * uy + Px));
      my = std::max(my, std::abs(u * vx + v * vy + Py + g));
      cont = std::max(cont, std::abs(ux + vy));
      vort = std::max(vort, std::abs(uy - vx - flow.gamma[i]));
      const double Ek = s.P[k] + 0.5 * (u * u + v * v) + g * s.y[k] -
                        0.5 * (flow.a[i] * flow.a[i] - a0 * a0);
      energy = std::max(energy, std::abs(2.0 * Ek - s.Q));
      umax = std::max(umax, u);
      if (i > 0 && i + 1 < n) {
        const double F1 = (lam * lam + hq[k] * hq[k]) * hpp[k] - 2.0 * hp[k] * hq[k] * hpq[k] +
                          hp[k] * hp[k] * hqq[k] - lam * lam * flow.gamma[i] * std::pow(hp[k], 3);
        height = std::max(height, std::abs(F1));
        stream = std::max(stream, std::abs(F1 / (lam * lam * std::pow(hp[k], 3))));
      }
    }
  }

  const std::size_t top = n - 1;
  const auto Hb = bending_operator(s.eta, lam);
  const auto ex = spectral::periodic_derivative(s.eta, 1);
  double dyn = 0, kin = 0, bed = 0, bern = 0, trace = 0;
  for (std::size_t j = 0; j < N; ++j) {
    const std::size_t k = s.idx(top, j);
    const double u = s.u[k], v = s.v[k];
    dyn = std::max(dyn, std::abs(s.P[k] - params.alpha * Hb[j]));
    kin = std::max(kin, std::abs(v - u * ex[j] / lam));
    bern = std::max(bern, std::abs(u * u + v * v + 2 * g * s.eta[j] + 2 * params.alpha * Hb[j] - s.Q));
    trace = std::max(trace, std::abs(s.eta[j] - s.y[k]));
    bed = std::max(bed, std::abs(s.v[s.idx(0, j)]));
  }
  // bottom row must sit on the bed
  double bed_pos = 0.0;
  for (std::size_t j = 0; j < N; ++j) bed_pos = std::max(bed_pos, std::abs(s.y[j] + params.d));

  ResidualReport rep;
  rep.dp = dp;
  const double amp = max_abs(s.eta);
  rep.grid_tol = grid_tolerance(dp, amp);
  const double gt = rep.grid_tol;
  rep.entries = {
      {"momentum_x", mx, gt},
      {"momentum_y", my, gt},
      {"incompressibility", cont, gt},
      {"vorticity", vort, gt},
      {"stream_function", stream, gt},
      {"height_function", height, gt},
      {"energy", energy, gt},
      {"dynamic_bc", dyn, gt},
      {"bernoulli", bern, gt},
      {"kinematic_bc", kin, 1e-10},
      {"bed_bc", bed, 1e-12},
      {"bed_position", bed_pos, 1e-12},
      {"surface_trace", trace, 1e-12},
      {"mean_eta", std::abs(periodic_mean(s.eta)), 1e-10},
      {"plate_integral", std::abs(lam * periodic_mean(Hb)), 1e-9},
      {"max_u", umax, 0.0},
  };
  // u < 0 is required strictly
  if (umax >= 0) rep.entries.back().tol = -1.0;
  return rep;
}

ProfileDiagnostics profile_diagnostics(std::span<const double> eta, double lambda) {
  const std::size_t N = eta.size();
  if (N < 2) throw DomainError("profile_diagnostics: need at least two samples");
  ProfileDiagnostics d;
  d.mean = periodic_mean(eta);
  const auto [mn, mxit] = std::minmax_element(eta.begin(), eta.end());
  const std::size_t c = static_cast<std::size_t>(mxit - eta.begin());
  const std::size_t t = static_cast<std::size_t>(mn - eta.begin());
  const double scale = std::max(std::abs(*mxit), std::abs(*mn));
  d.degenerate = !(*mxit - *mn > 1e-14 * std::max(1.0, scale));
  d.crest_x = lambda * static_cast<double>(c) / N;
  d.trough_x = lambda * static_cast<double>(t) / N;
  for (std::size_t j = 0; j < N; ++j) {
    d.symmetry_defect = std::max(d.symmetry_defect, std::abs(eta[j] - eta[(N - j) % N]));
  }
  if (d.degenerate) return d;
  bool mono = true;
  for (std::size_t j = c; j % N != t; ++j) {
    if (!(eta[(j + 1) % N] < eta[j % N])) mono = false;
  }
  for (std::size_t j = t; j % N != c; ++j) {
    if (!(eta[(j + 1) % N] > eta[j % N])) mono = false;
  }
  d.monotone = mono;
  return d;
}

}  // namespace flexwave
