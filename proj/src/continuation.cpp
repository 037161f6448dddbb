#include "flexwave/continuation.hpp"

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <Eigen/SparseLU>
#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "flexwave/errors.hpp"
#include "flexwave/numerics/quadrature.hpp"
#include "flexwave/numerics/roots.hpp"
#include "flexwave/spectral.hpp"

namespace flexwave {

namespace {

constexpr double kPi = std::numbers::pi;
using SpMat = Eigen::SparseMatrix<double>;
using Triplet = Eigen::Triplet<double>;

// Dense spectral operators on half-period samples.
struct GridOps {
  std::size_t M, cols, n;
  double dp;
  Eigen::MatrixXd D1, D2, Ccos;
  std::vector<double> qw;  // period-mean weights
  std::vector<double> pw;  // trapezoid weights in p

  GridOps(std::size_t n_q, std::size_t n_p, double dp_)
      : M(n_q / 2), cols(n_q / 2 + 1), n(n_p), dp(dp_) {
    if (n_q < 4 || (n_q & (n_q - 1)) != 0) {
      throw DomainError("continuation: N_q must be a power of two >= 4");
    }
    if (n_p < 5) throw DomainError("continuation: need at least 5 p-levels");
    D1.resize(cols, cols);
    D2.resize(cols, cols);
    Ccos.resize(cols, cols);
    std::vector<double> e(cols, 0.0);
    for (std::size_t l = 0; l < cols; ++l) {
      e[l] = 1.0;
      const auto d1 = spectral::even_derivative(e);
      const auto d2 = spectral::even_second_derivative(e);
      const auto cc = spectral::cos_coeffs(e);
      for (std::size_t j = 0; j < cols; ++j) {
        D1(j, l) = d1[j];
        D2(j, l) = d2[j];
        Ccos(j, l) = cc[j];
      }
      e[l] = 0.0;
    }
    qw.assign(cols, 1.0 / static_cast<double>(M));
    qw.front() = qw.back() = 0.5 / static_cast<double>(M);
    pw.assign(n, dp);
    pw.front() = pw.back() = 0.5 * dp;
  }

  static GridOps for_field(const HeightField& f, const LaminarFlow& flow) {
    if (f.n_p != flow.size()) {
      throw DomainError("continuation: field and laminar flow have different p-grids");
    }
    return GridOps(f.n_q, f.n_p, flow.dp());
  }
};

Eigen::Map<const Eigen::VectorXd> row_map(const HeightField& f, std::size_t i) {
  return Eigen::Map<const Eigen::VectorXd>(f.w.data() + i * f.cols(),
                                           static_cast<Eigen::Index>(f.cols()));
}

// Surface derivative of w in p, one-sided second order.
std::vector<double> surface_wp(const HeightField& f, double dp) {
  const std::size_t n = f.n_p;
  std::vector<double> out(f.cols());
  for (std::size_t j = 0; j < f.cols(); ++j) {
    out[j] = (3.0 * f(n - 1, j) - 4.0 * f(n - 2, j) + f(n - 3, j)) / (2.0 * dp);
  }
  return out;
}

std::vector<double> psi_nodal(const std::vector<double>& h0, const std::vector<double>& hp0,
                              double lambda, const PhysicalParams& params) {
  auto t = SurfaceTraces::make(PeriodicEvenFn(h0), PeriodicEvenFn(hp0), lambda);
  return op_Psi(t, params, false).half;
}

std::vector<double> surface_hp(const HeightField& f, const LaminarFlow& flow, double dp) {
  auto hp = surface_wp(f, dp);
  const double Hp = flow.H_prime(flow.size() - 1);
  for (auto& v : hp) v += Hp;
  return hp;
}

void require_admissible(const HeightField& f, const LaminarFlow& flow) {
  const auto hp = total_hp(f, flow);
  for (std::size_t k = 0; k < hp.size(); ++k) {
    if (!(hp[k] > 0)) {
      std::ostringstream msg;
      msg << "height field leaves the admissible set: h_p = " << hp[k] << " at p-index "
          << k / f.cols() << ", q-index " << k % f.cols();
      throw DomainError(msg.str());
    }
  }
}

struct Interior {
  Eigen::VectorXd wq, wqq, wp, wpp, wpq;
};

Interior interior_derivs(const HeightField& f, const GridOps& g, std::size_t i) {
  Interior d;
  const auto wm = row_map(f, i - 1), w0 = row_map(f, i), wpl = row_map(f, i + 1);
  d.wq = g.D1 * w0;
  d.wqq = g.D2 * w0;
  d.wp = (wpl - wm) / (2.0 * g.dp);
  d.wpp = (wpl - 2.0 * w0 + wm) / (g.dp * g.dp);
  d.wpq = g.D1 * d.wp;
  return d;
}

}  // namespace

HeightField HeightField::zero(std::size_t n_q, std::size_t n_p, double lambda) {
  HeightField f;
  f.n_q = n_q;
  f.n_p = n_p;
  f.lambda = lambda;
  f.w.assign(n_p * (n_q / 2 + 1), 0.0);
  return f;
}

std::vector<double> HeightField::row(std::size_t i) const {
  return std::vector<double>(w.begin() + static_cast<std::ptrdiff_t>(i * cols()),
                             w.begin() + static_cast<std::ptrdiff_t>((i + 1) * cols()));
}

std::vector<double> total_hp(const HeightField& f, const LaminarFlow& flow) {
  const std::size_t n = f.n_p, c = f.cols();
  const double dp = flow.dp();
  std::vector<double> hp(n * c);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < c; ++j) {
      double wp;
      if (i == 0) {
        wp = (-3.0 * f(0, j) + 4.0 * f(1, j) - f(2, j)) / (2.0 * dp);
      } else if (i == n - 1) {
        wp = (3.0 * f(n - 1, j) - 4.0 * f(n - 2, j) + f(n - 3, j)) / (2.0 * dp);
      } else {
        wp = (f(i + 1, j) - f(i - 1, j)) / (2.0 * dp);
      }
      hp[i * c + j] = flow.H_prime(i) + wp;
    }
  }
  return hp;
}

bool in_admissible_set(const HeightField& f, const LaminarFlow& flow) {
  const auto hp = total_hp(f, flow);
  return std::all_of(hp.begin(), hp.end(), [](double v) { return v > 0; });
}

double ResidualF::max_norm() const {
  double m = 0.0;
  for (double v : interior) m = std::max(m, std::abs(v));
  for (double v : boundary.half) m = std::max(m, std::abs(v));
  return m;
}

ResidualF residual_F(const HeightField& f, const LaminarFlow& flow,
                     const PhysicalParams& params) {
  const GridOps g = GridOps::for_field(f, flow);
  require_admissible(f, flow);
  const double lam = f.lambda;
  const double l2 = lam * lam;
  ResidualF r;
  r.interior.assign((g.n - 2) * g.cols, 0.0);
  for (std::size_t i = 1; i + 1 < g.n; ++i) {
    const Interior d = interior_derivs(f, g, i);
    const double Hp = flow.H_prime(i), Hpp = flow.H_second(i), gam = flow.gamma[i];
    for (std::size_t j = 0; j < g.cols; ++j) {
      const double hp = Hp + d.wp[j];
      const double wq = d.wq[j];
      r.interior[(i - 1) * g.cols + j] = (l2 + wq * wq) * (Hpp + d.wpp[j]) -
                                         2.0 * hp * wq * d.wpq[j] + hp * hp * d.wqq[j] -
                                         l2 * gam * hp * hp * hp;
    }
  }
  const auto h0 = f.row(g.n - 1);
  const auto psi = psi_nodal(h0, surface_hp(f, flow, g.dp), lam, params);
  std::vector<double> b(g.cols);
  for (std::size_t j = 0; j < g.cols; ++j) b[j] = h0[j] - psi[j];
  r.boundary = PeriodicEvenFn(std::move(b));
  return r;
}

LinearImage apply_LT(const HeightField& dir, const LaminarFlow& flow,
                     const PhysicalParams& params, double lambda) {
  const GridOps g = GridOps::for_field(dir, flow);
  const double l2 = lambda * lambda;
  LinearImage out;
  out.Lh.assign((g.n - 2) * g.cols, 0.0);
  for (std::size_t i = 1; i + 1 < g.n; ++i) {
    const Interior d = interior_derivs(dir, g, i);
    const double Hp = flow.H_prime(i), gam = flow.gamma[i];
    for (std::size_t j = 0; j < g.cols; ++j) {
      out.Lh[(i - 1) * g.cols + j] =
          l2 * d.wpp[j] + Hp * Hp * d.wqq[j] - 3.0 * l2 * gam * Hp * Hp * d.wp[j];
    }
  }
  // T[h] = tr h - (1 - d_q^2)^{-1} [tr h - (lambda^4/alpha)(S - mean S)]
  const auto h0 = dir.row(g.n - 1);
  const auto wp = surface_wp(dir, g.dp);
  const double a0 = flow.a.back();
  const double a03 = a0 * a0 * a0;
  std::vector<double> sig(g.cols), flux(g.cols);
  for (std::size_t j = 0; j < g.cols; ++j) flux[j] = wp[j] * a03;
  const double fmean = spectral::mean(flux);
  for (std::size_t j = 0; j < g.cols; ++j) sig[j] = flux[j] - params.g * h0[j] - fmean;
  auto S = spectral::even_double_antiderivative(sig);
  const double Smean = spectral::mean(S);
  const double l4a = l2 * l2 / params.alpha;
  std::vector<double> arg(g.cols);
  for (std::size_t j = 0; j < g.cols; ++j) arg[j] = h0[j] - l4a * (S[j] - Smean);
  auto c = spectral::cos_coeffs(arg);
  for (std::size_t k = 1; k < c.size(); ++k) {
    const double w = 2.0 * kPi * static_cast<double>(k);
    c[k] /= 1.0 + w * w;
  }
  const auto inv = spectral::cos_synth(c);
  std::vector<double> T(g.cols);
  for (std::size_t j = 0; j < g.cols; ++j) T[j] = h0[j] - inv[j];
  out.Th = PeriodicEvenFn(std::move(T));
  return out;
}

double inner_product(const HeightField& a, const HeightField& b, double dp) {
  if (a.n_q != b.n_q || a.n_p != b.n_p) {
    throw DomainError("inner_product: fields live on different grids");
  }
  const std::size_t c = a.cols(), M = a.M();
  double total = 0.0;
  for (std::size_t i = 0; i < a.n_p; ++i) {
    const double wp = (i == 0 || i + 1 == a.n_p) ? 0.5 : 1.0;
    double row = 0.0;
    for (std::size_t j = 0; j < c; ++j) {
      const double wq = (j == 0 || j == M) ? 0.5 : 1.0;
      row += wq * a(i, j) * b(i, j);
    }
    total += wp * row / static_cast<double>(M);
  }
  return total * dp;
}

namespace {

// Unit norm, positive surface value at q = 0.
void normalise(HeightField& f, double dp) {
  const double nrm = std::sqrt(inner_product(f, f, dp));
  if (!(nrm > 0)) throw NumericalError("kernel vector vanishes");
  const double sgn = f(f.n_p - 1, 0) < 0 ? -1.0 : 1.0;
  for (auto& v : f.w) v *= sgn / nrm;
}

struct ModeCoeffs {
  std::vector<double> A, B, C;  // f_{i+1}, f_i, f_{i-1} in interior row i
  double boundary = 0.0;        // coefficient of f(0) next to -f'(0)
};

ModeCoeffs mode_coeffs(const LaminarFlow& flow, const PhysicalParams& params,
                       double lambda, int k) {
  const std::size_t n = flow.size();
  const double dp = flow.dp();
  const double kap = 2.0 * kPi * k / lambda;
  ModeCoeffs m;
  m.A.resize(n);
  m.B.resize(n);
  m.C.resize(n);
  for (std::size_t i = 1; i + 1 < n; ++i) {
    const double Hp2 = flow.H_prime(i) * flow.H_prime(i);
    const double adv = 3.0 * flow.gamma[i] * Hp2 / (2.0 * dp);
    m.A[i] = 1.0 / (dp * dp) - adv;
    m.C[i] = 1.0 / (dp * dp) + adv;
    m.B[i] = -2.0 / (dp * dp) - kap * kap * Hp2;
  }
  const double a0 = flow.a.back();
  m.boundary = (params.g + params.alpha * std::pow(kap, 4)) / (a0 * a0 * a0);
  return m;
}

std::vector<double> march(const ModeCoeffs& m, std::size_t n) {
  std::vector<double> f(n, 0.0);
  f[1] = 1.0;
  for (std::size_t i = 1; i + 1 < n; ++i) f[i + 1] = -(m.B[i] * f[i] + m.C[i] * f[i - 1]) / m.A[i];
  return f;
}

double boundary_residual(const ModeCoeffs& m, const std::vector<double>& f, double dp) {
  const std::size_t n = f.size();
  const double fp = (3.0 * f[n - 1] - 4.0 * f[n - 2] + f[n - 3]) / (2.0 * dp);
  return m.boundary * f[n - 1] - fp;
}

HeightField mode_field(const std::vector<double>& f, std::size_t n_q, int k, double lambda) {
  HeightField h = HeightField::zero(n_q, f.size(), lambda);
  for (std::size_t i = 0; i < f.size(); ++i) {
    for (std::size_t j = 0; j < h.cols(); ++j) {
      h(i, j) = f[i] * std::cos(2.0 * kPi * k * static_cast<double>(j) / n_q);
    }
  }
  return h;
}

// Mode-k matrix acting on (f_1, ..., f_{n-1}), rows scaled as an L2 operator.
SpMat mode_matrix(const LaminarFlow& flow, const PhysicalParams& params, double lambda,
                  int k) {
  const std::size_t n = flow.size();
  const double dp = flow.dp();
  const ModeCoeffs m = mode_coeffs(flow, params, lambda, k);
  std::vector<Triplet> t;
  for (std::size_t i = 1; i + 1 < n; ++i) {
    const auto r = static_cast<int>(i - 1);
    if (i >= 2) t.emplace_back(r, static_cast<int>(i - 2), m.C[i]);
    t.emplace_back(r, static_cast<int>(i - 1), m.B[i]);
    t.emplace_back(r, static_cast<int>(i), m.A[i]);
  }
  const auto rb = static_cast<int>(n - 2);
  const double sc = 1.0 / std::sqrt(dp);
  if (k == 0) {
    t.emplace_back(rb, rb, sc);
  } else {
    t.emplace_back(rb, rb, sc * (m.boundary - 3.0 / (2.0 * dp)));
    t.emplace_back(rb, rb - 1, sc * 4.0 / (2.0 * dp));
    t.emplace_back(rb, rb - 2, sc * -1.0 / (2.0 * dp));
  }
  SpMat A(static_cast<int>(n - 1), static_cast<int>(n - 1));
  A.setFromTriplets(t.begin(), t.end());
  A.makeCompressed();
  return A;
}

struct SmallestSV {
  double sigma = 0.0;
  Eigen::VectorXd v;
};

SmallestSV smallest_singular(const SpMat& A) {
  Eigen::SparseLU<SpMat> lu;
  lu.compute(A);
  SmallestSV out;
  const auto n = A.cols();
  if (lu.info() != Eigen::Success) {
    out.sigma = 0.0;
    return out;
  }
  Eigen::VectorXd x(n);
  for (Eigen::Index i = 0; i < n; ++i) x[i] = 1.0 + 0.5 * std::sin(0.7 * static_cast<double>(i));
  x.normalize();
  double prev = 0.0;
  for (int it = 0; it < 500; ++it) {
    Eigen::VectorXd y = lu.transpose().solve(x);
    Eigen::VectorXd z = lu.solve(y);
    const double nz = z.norm();
    if (!std::isfinite(nz) || nz == 0.0) {
      out.sigma = 0.0;
      return out;
    }
    const double est = 1.0 / std::sqrt(nz);
    x = z / nz;
    if (it > 2 && std::abs(est - prev) <= 1e-12 * est) {
      prev = est;
      break;
    }
    prev = est;
  }
  out.sigma = prev;
  out.v = x;
  return out;
}

}  // namespace

double discrete_lambda_star(const LaminarFlow& flow, const PhysicalParams& params,
                            double guess, int k) {
  if (!(guess > 0) || k < 1) throw DomainError("discrete_lambda_star: bad arguments");
  const double dp = flow.dp();
  auto r = [&](double lam) {
    const ModeCoeffs m = mode_coeffs(flow, params, lam, k);
    const auto f = march(m, flow.size());
    return boundary_residual(m, f, dp) / std::max(1.0, std::abs(f.back()));
  };
  double lo = 0.95 * guess, hi = 1.05 * guess;
  double flo = r(lo), fhi = r(hi);
  for (int i = 0; i < 40 && !(flo * fhi < 0); ++i) {
    lo *= 0.97;
    hi *= 1.03;
    flo = r(lo);
    fhi = r(hi);
  }
  if (!(flo * fhi < 0)) {
    throw NumericalError("discrete_lambda_star: no sign change near the guess");
  }
  return numerics::brent(r, lo, hi, flo, fhi, {1e-14, 0.0, 300}).x;
}

HeightField discrete_kernel(const LaminarFlow& flow, const PhysicalParams& params,
                            std::size_t n_q, double lambda, int k) {
  const auto f = march(mode_coeffs(flow, params, lambda, k), flow.size());
  HeightField h = mode_field(f, n_q, k, lambda);
  normalise(h, flow.dp());
  return h;
}

HeightField shooting_kernel(const BifurcationPoint& bif, const LaminarFlow& flow,
                            std::size_t n_q) {
  if (bif.f1_star.f.size() != flow.size()) {
    throw DomainError("shooting_kernel: bifurcation point computed on another grid");
  }
  HeightField h = mode_field(bif.f1_star.f, n_q, 1, bif.lambda_star);
  normalise(h, flow.dp());
  return h;
}

KernelInfo kernel_at(double lambda, const LaminarFlow& flow, const PhysicalParams& params,
                     std::size_t n_q) {
  if (!(lambda > 0)) throw DomainError("kernel_at: lambda must be positive");
  const std::size_t M = n_q / 2;
  KernelInfo info;
  info.threshold = kKernelThreshold * flow.dp();
  std::vector<Eigen::VectorXd> vecs(M + 1);
  for (std::size_t k = 0; k <= M; ++k) {
    const auto sv = smallest_singular(mode_matrix(flow, params, lambda, static_cast<int>(k)));
    info.sigma_min.push_back(sv.sigma);
    vecs[k] = sv.v;
    if (sv.sigma < info.threshold) info.null_modes.push_back(static_cast<int>(k));
  }
  info.dimension = static_cast<int>(info.null_modes.size());
  if (info.dimension == 1) {
    const int k = info.null_modes.front();
    std::vector<double> f(flow.size(), 0.0);
    if (vecs[k].size() == 0) {
      f = march(mode_coeffs(flow, params, lambda, k), flow.size());
    } else {
      for (std::size_t i = 1; i < flow.size(); ++i) f[i] = vecs[k][static_cast<int>(i - 1)];
    }
    info.kernel = mode_field(f, n_q, k, lambda);
    normalise(info.kernel, flow.dp());
  }
  return info;
}

double range_functional(const BifurcationPoint& bif, const LaminarFlow& flow,
                        const PhysicalParams& params, const std::vector<double>& F,
                        const PeriodicEvenFn& phi) {
  const std::size_t n = flow.size();
  const std::size_t c = phi.half.size();
  if (F.size() != n * c || bif.f1_star.f.size() != n) {
    throw DomainError("range_functional: inconsistent grid sizes");
  }
  const std::size_t n_q = 2 * (c - 1);
  std::vector<double> cosq(c), qw(c, 1.0 / static_cast<double>(c - 1));
  qw.front() = qw.back() = 0.5 / static_cast<double>(c - 1);
  for (std::size_t j = 0; j < c; ++j) cosq[j] = std::cos(2.0 * kPi * j / n_q);
  std::vector<double> rows(n);
  for (std::size_t i = 0; i < n; ++i) {
    double acc = 0.0;
    for (std::size_t j = 0; j < c; ++j) acc += qw[j] * cosq[j] * F[i * c + j];
    rows[i] = std::pow(flow.a[i], 3) * bif.f1_star.f[i] * acc;
  }
  const double bulk = numerics::simpson_samples(rows, flow.dp());
  double surf = 0.0;
  for (std::size_t j = 0; j < c; ++j) surf += qw[j] * phi.half[j] * bif.f1_star.f0 * cosq[j];
  const double C0 = bif.C0, ls = bif.lambda_star;
  return bulk + params.alpha * C0 * (1.0 + C0 * ls * ls) * surf;
}

Transversality transversality(const LaminarFlow& flow, const PhysicalParams& params,
                              const BifurcationPoint& bif, std::size_t n_q) {
  const std::size_t n = flow.size();
  const double dp = flow.dp();
  const auto& r = bif.f1_star;
  if (r.f.size() != n || n < 7) throw DomainError("transversality: grid mismatch");
  const double ls = bif.lambda_star;

  // (a^3 f')' by fourth-order differences of the sampled flux
  std::vector<double> v(n), dv(n);
  for (std::size_t i = 0; i < n; ++i) v[i] = std::pow(flow.a[i], 3) * r.fprime[i];
  for (std::size_t i = 2; i + 2 < n; ++i) {
    dv[i] = (-v[i + 2] + 8.0 * v[i + 1] - 8.0 * v[i - 1] + v[i - 2]) / (12.0 * dp);
  }
  auto one_sided = [&](auto at, double sgn) {
    const double d0 = (-25 * at(0) + 48 * at(1) - 36 * at(2) + 16 * at(3) - 3 * at(4)) / (12 * dp);
    const double d1 = (-3 * at(0) - 10 * at(1) + 18 * at(2) - 6 * at(3) + at(4)) / (12 * dp);
    return std::pair{sgn * d0, sgn * d1};
  };
  auto [b0, b1] = one_sided([&](std::size_t k) { return v[k]; }, 1.0);
  auto [t0, t1] = one_sided([&](std::size_t k) { return v[n - 1 - k]; }, -1.0);
  dv[0] = b0;
  dv[1] = b1;
  dv[n - 1] = t0;
  dv[n - 2] = t1;

  const std::size_t c = n_q / 2 + 1;
  std::vector<double> F(n * c);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < c; ++j) {
      F[i * c + j] = 2.0 * ls * dv[i] / std::pow(flow.a[i], 3) *
                     std::cos(2.0 * kPi * j / n_q);
    }
  }

  // second component: (4 lambda^3 / alpha)(1 - d_q^2)^{-1}[S - mean S]
  const double a0 = flow.a.back();
  std::vector<double> flux(c), sig(c);
  for (std::size_t j = 0; j < c; ++j) {
    const double cq = std::cos(2.0 * kPi * j / n_q);
    flux[j] = a0 * a0 * a0 * r.fp0 * cq;
    sig[j] = flux[j] - params.g * r.f0 * cq;
  }
  const double fm = spectral::mean(flux);
  for (auto& s : sig) s -= fm;
  auto S = spectral::even_double_antiderivative(sig);
  const double Sm = spectral::mean(S);
  for (auto& s : S) s -= Sm;
  auto phi = helmholtz_inv(PeriodicEvenFn(S));
  for (auto& p : phi.half) p *= 4.0 * ls * ls * ls / params.alpha;

  Transversality out;
  out.quadrature = range_functional(bif, flow, params, F, phi);
  std::vector<double> e(n);
  for (std::size_t i = 0; i < n; ++i) e[i] = std::pow(flow.a[i], 3) * r.fprime[i] * r.fprime[i];
  out.closed_form = ls * ((params.g - params.alpha * bif.C0 * bif.C0) * r.f0 * r.f0 -
                          numerics::simpson_samples(e, dp));
  return out;
}

namespace {

// Augmented Newton system: unknowns w(i = 1..n-1, j) and lambda; equations
// F1 inside, mean(tr0 w) and cosine modes 1..M of F2 on the surface, and the
// amplitude condition.
class AugmentedSystem {
 public:
  AugmentedSystem(const LaminarFlow& flow, const PhysicalParams& params,
                  const HeightField& kernel, double s, const NewtonOptions& opts)
      : flow_(flow), params_(params), kernel_(kernel), s_(s), opts_(opts),
        g_(GridOps::for_field(kernel, flow)) {
    size_ = (g_.n - 1) * g_.cols + 1;
  }

  Eigen::Index size() const { return static_cast<Eigen::Index>(size_); }
  Eigen::Index col(std::size_t i, std::size_t j) const {
    return static_cast<Eigen::Index>((i - 1) * g_.cols + j);
  }
  Eigen::Index lambda_col() const { return static_cast<Eigen::Index>(size_ - 1); }

  // Max norm over F1, nodal F2, the mean condition and the amplitude condition.
  double norm(const HeightField& f, Eigen::VectorXd* R) const {
    const ResidualF rf = residual_F(f, flow_, params_);
    double m = rf.max_norm();
    if (R) {
      R->resize(size());
      for (std::size_t k = 0; k < rf.interior.size(); ++k) (*R)[static_cast<Eigen::Index>(k)] = rf.interior[k];
      const auto coeffs = spectral::cos_coeffs(rf.boundary.half);
      const std::size_t base = (g_.n - 2) * g_.cols;
      for (std::size_t k = 1; k < g_.cols; ++k) (*R)[static_cast<Eigen::Index>(base + k)] = coeffs[k];
      (*R)[static_cast<Eigen::Index>(base)] = spectral::mean(f.row(g_.n - 1));
      (*R)[lambda_col()] = amplitude(f) - s_;
    }
    m = std::max(m, std::abs(spectral::mean(f.row(g_.n - 1))));
    m = std::max(m, std::abs(amplitude(f) - s_));
    return m;
  }

  double amplitude(const HeightField& f) const { return inner_product(f, kernel_, g_.dp); }

  SpMat jacobian(const HeightField& f) const {
    std::vector<Triplet> t;
    const std::size_t n = g_.n, c = g_.cols;
    const double lam = f.lambda, l2 = lam * lam, dp = g_.dp;
    t.reserve((n - 2) * c * (3 * c + 6) + 4 * c * c + size_);
    for (std::size_t i = 1; i + 1 < n; ++i) {
      const Interior d = interior_derivs(f, g_, i);
      const double Hp = flow_.H_prime(i), Hpp = flow_.H_second(i), gam = flow_.gamma[i];
      for (std::size_t j = 0; j < c; ++j) {
        const auto row = col(i, j);
        const double hp = Hp + d.wp[j], wq = d.wq[j];
        const double a_q = 2.0 * wq * (Hpp + d.wpp[j]) - 2.0 * hp * d.wpq[j];
        const double a_qq = hp * hp;
        const double a_pp = l2 + wq * wq;
        const double a_p = -2.0 * wq * d.wpq[j] + 2.0 * hp * d.wqq[j] - 3.0 * l2 * gam * hp * hp;
        const double a_pq = -2.0 * hp * wq;
        for (std::size_t l = 0; l < c; ++l) {
          const double v = a_q * g_.D1(j, l) + a_qq * g_.D2(j, l);
          if (v != 0.0) t.emplace_back(row, col(i, l), v);
          const double u = a_pq * g_.D1(j, l) / (2.0 * dp);
          if (u != 0.0) {
            t.emplace_back(row, col(i + 1, l), u);
            if (i >= 2) t.emplace_back(row, col(i - 1, l), -u);
          }
        }
        t.emplace_back(row, col(i + 1, j), a_p / (2.0 * dp) + a_pp / (dp * dp));
        if (i >= 2) t.emplace_back(row, col(i - 1, j), -a_p / (2.0 * dp) + a_pp / (dp * dp));
        t.emplace_back(row, col(i, j), -2.0 * a_pp / (dp * dp));
        t.emplace_back(row, lambda_col(),
                       2.0 * lam * (Hpp + d.wpp[j]) - 2.0 * lam * gam * hp * hp * hp);
      }
    }

    // surface block: derivatives of Psi by centred differences
    const auto h0 = f.row(n - 1);
    const auto hp0 = surface_hp(f, flow_, dp);
    Eigen::MatrixXd dF2(c, 3 * c);  // columns: w(n-1,.), w(n-2,.), w(n-3,.)
    dF2.setZero();
    for (std::size_t l = 0; l < c; ++l) {
      auto perturbed = [&](std::vector<double> a, std::vector<double> b, bool first, double dlt) {
        (first ? a : b)[l] += dlt;
        return psi_nodal(a, b, lam, params_);
      };
      const double d0 = opts_.fd_rel_step * std::max(1.0, std::abs(h0[l]));
      const auto ph = perturbed(h0, hp0, true, d0), mh = perturbed(h0, hp0, true, -d0);
      const double d1 = opts_.fd_rel_step * std::max(1.0, std::abs(hp0[l]));
      const auto pp = perturbed(h0, hp0, false, d1), mp = perturbed(h0, hp0, false, -d1);
      for (std::size_t m = 0; m < c; ++m) {
        const double dh = (ph[m] - mh[m]) / (2.0 * d0);
        const double dhp = (pp[m] - mp[m]) / (2.0 * d1);
        dF2(m, l) = (m == l ? 1.0 : 0.0) - dh - dhp * 3.0 / (2.0 * dp);
        dF2(m, c + l) = dhp * 4.0 / (2.0 * dp);
        dF2(m, 2 * c + l) = -dhp / (2.0 * dp);
      }
    }
    const double dl = opts_.fd_rel_step * lam;
    const auto plp = psi_nodal(h0, hp0, lam + dl, params_);
    const auto plm = psi_nodal(h0, hp0, lam - dl, params_);
    Eigen::VectorXd dF2dl(c);
    for (std::size_t m = 0; m < c; ++m) dF2dl[m] = -(plp[m] - plm[m]) / (2.0 * dl);
    const Eigen::MatrixXd coef = g_.Ccos * dF2;
    const Eigen::VectorXd coefl = g_.Ccos * dF2dl;
    const std::size_t base = (n - 2) * c;
    for (std::size_t k = 1; k < c; ++k) {
      const auto row = static_cast<Eigen::Index>(base + k);
      for (std::size_t l = 0; l < c; ++l) {
        t.emplace_back(row, col(n - 1, l), coef(k, l));
        t.emplace_back(row, col(n - 2, l), coef(k, c + l));
        if (n - 3 >= 1) t.emplace_back(row, col(n - 3, l), coef(k, 2 * c + l));
      }
      t.emplace_back(row, lambda_col(), coefl[k]);
    }
    for (std::size_t l = 0; l < c; ++l) {
      t.emplace_back(static_cast<Eigen::Index>(base), col(n - 1, l), g_.qw[l]);
    }
    // amplitude row
    for (std::size_t i = 1; i < n; ++i) {
      for (std::size_t j = 0; j < c; ++j) {
        const double v = g_.pw[i] * g_.qw[j] * kernel_(i, j);
        if (v != 0.0) t.emplace_back(lambda_col(), col(i, j), v);
      }
    }
    SpMat J(size(), size());
    J.setFromTriplets(t.begin(), t.end());
    J.makeCompressed();
    return J;
  }

  HeightField step(const HeightField& f, const Eigen::VectorXd& dx, double t) const {
    HeightField out = f;
    for (std::size_t i = 1; i < g_.n; ++i) {
      for (std::size_t j = 0; j < g_.cols; ++j) out(i, j) += t * dx[col(i, j)];
    }
    out.lambda += t * dx[lambda_col()];
    return out;
  }

 private:
  const LaminarFlow& flow_;
  const PhysicalParams& params_;
  const HeightField& kernel_;
  double s_;
  NewtonOptions opts_;
  GridOps g_;
  std::size_t size_;
};

}  // namespace

NewtonResult newton_solve(const HeightField& initial, double s, const HeightField& kernel,
                          const LaminarFlow& flow, const PhysicalParams& params,
                          const NewtonOptions& opts) {
  if (initial.n_q != kernel.n_q || initial.n_p != kernel.n_p) {
    throw DomainError("newton_solve: initial guess and kernel grids differ");
  }
  if (!(initial.lambda > 0)) throw DomainError("newton_solve: lambda must be positive");
  if (!in_admissible_set(initial, flow)) {
    throw DomainError("newton_solve: initial guess violates h_p > 0");
  }
  const AugmentedSystem sys(flow, params, kernel, s, opts);
  NewtonResult res;
  res.field = initial;
  Eigen::VectorXd R;
  double nrm = sys.norm(res.field, &R);
  for (int it = 0; it < opts.max_iter; ++it) {
    if (nrm < opts.tol) {
      res.residual = nrm;
      return res;
    }
    const SpMat J = sys.jacobian(res.field);
    Eigen::SparseLU<SpMat> lu;
    lu.analyzePattern(J);
    lu.factorize(J);
    if (lu.info() != Eigen::Success) {
      throw NumericalError("newton_solve: singular Jacobian (" + lu.lastErrorMessage() + ")");
    }
    const Eigen::VectorXd dx = lu.solve(-R);
    double t = 1.0;
    bool accepted = false;
    for (int h = 0; h <= opts.max_halvings; ++h, t *= 0.5) {
      HeightField trial = sys.step(res.field, dx, t);
      if (!(trial.lambda > 0) || !in_admissible_set(trial, flow)) continue;
      Eigen::VectorXd Rt;
      const double nt = sys.norm(trial, &Rt);
      if (std::isfinite(nt) && nt < nrm) {
        res.field = std::move(trial);
        R = std::move(Rt);
        nrm = nt;
        accepted = true;
        break;
      }
    }
    res.iterations = it + 1;
    if (!accepted) {
      std::ostringstream msg;
      msg << "newton_solve: no decrease after " << opts.max_halvings
          << " step halvings (residual " << nrm << ")";
      throw NumericalError(msg.str());
    }
  }
  res.residual = nrm;
  if (!(nrm < opts.tol)) {
    std::ostringstream msg;
    msg << "newton_solve: no convergence in " << opts.max_iter << " iterations (residual "
        << nrm << ")";
    throw NumericalError(msg.str());
  }
  return res;
}

Branch continue_branch(const BifurcationPoint& bif, double s_max, int n_steps,
                       const LaminarFlow& flow, const PhysicalParams& params, std::size_t n_q,
                       const NewtonOptions& opts) {
  if (n_steps < 0) throw DomainError("continue_branch: n_steps must be non-negative");
  Branch br;
  br.lambda_star_h = discrete_lambda_star(flow, params, bif.lambda_star, 1);
  br.kernel = discrete_kernel(flow, params, n_q, br.lambda_star_h, 1);

  BranchPoint p0;
  p0.s = 0.0;
  p0.lambda = br.lambda_star_h;
  p0.field = HeightField::zero(n_q, flow.size(), br.lambda_star_h);
  p0.residual_norm = residual_F(p0.field, flow, params).max_norm();
  br.points.push_back(p0);

  for (int k = 1; k <= n_steps; ++k) {
    const double s = s_max * k / n_steps;
    const BranchPoint& prev = br.points.back();
    HeightField guess = prev.field;
    if (k == 1) {
      guess = br.kernel;
      for (auto& v : guess.w) v *= s;
      guess.lambda = br.lambda_star_h;
    } else {
      for (auto& v : guess.w) v *= s / prev.s;
    }
    try {
      if (!in_admissible_set(guess, flow)) throw DomainError("guess violates h_p > 0");
      NewtonResult r = newton_solve(guess, s, br.kernel, flow, params, opts);
      BranchPoint bp;
      bp.s = s;
      bp.lambda = r.field.lambda;
      bp.residual_norm = r.residual;
      bp.iterations = r.iterations;
      bp.field = std::move(r.field);
      br.points.push_back(std::move(bp));
    } catch (const std::exception& e) {
      br.complete = false;
      std::ostringstream msg;
      msg << "branch truncated at s = " << s << ": " << e.what();
      br.note = msg.str();
      break;
    }
  }
  return br;
}

}  // namespace flexwave
