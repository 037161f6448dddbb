#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "flexwave/laminar.hpp"
#include "flexwave/sturm.hpp"
#include "flexwave/surface_ops.hpp"

namespace flexwave {

inline constexpr std::size_t kDefaultNq = 64;
inline constexpr std::size_t kDefaultBranchNp = 129;

// Perturbation w = h - H on the half-period grid q_j = j/N_q, j = 0..N_q/2,
// times the flow's p-grid. Row i = 0 is the bed and stays zero.
struct HeightField {
  std::size_t n_q = 0;
  std::size_t n_p = 0;
  std::vector<double> w;  // w[i * (M + 1) + j]
  double lambda = 0.0;

  static HeightField zero(std::size_t n_q, std::size_t n_p, double lambda);
  std::size_t M() const { return n_q / 2; }
  std::size_t cols() const { return n_q / 2 + 1; }
  double& operator()(std::size_t i, std::size_t j) { return w[i * cols() + j]; }
  double operator()(std::size_t i, std::size_t j) const { return w[i * cols() + j]; }
  std::vector<double> row(std::size_t i) const;
  PeriodicEvenFn surface() const { return PeriodicEvenFn(row(n_p - 1)); }
};

// h_p = H' + w_p at every node (central differences inside, one-sided
// second order at the bed and the surface).
std::vector<double> total_hp(const HeightField& field, const LaminarFlow& flow);
bool in_admissible_set(const HeightField& field, const LaminarFlow& flow);

struct ResidualF {
  std::vector<double> interior;  // rows i = 1..n_p-2, layout as HeightField
  PeriodicEvenFn boundary;       // tr0 w - Psi(lambda, w + H)
  double max_norm() const;
};

// Throws DomainError when h_p <= 0 somewhere.
ResidualF residual_F(const HeightField& field, const LaminarFlow& flow,
                     const PhysicalParams& params);

struct LinearImage {
  std::vector<double> Lh;  // rows i = 1..n_p-2
  PeriodicEvenFn Th;
};

// The linearization of F at (lambda, 0) applied to a direction.
LinearImage apply_LT(const HeightField& direction, const LaminarFlow& flow,
                     const PhysicalParams& params, double lambda);

// Discrete inner product: trapezoid in p, periodic trapezoid in q.
double inner_product(const HeightField& a, const HeightField& b, double dp);

struct KernelInfo {
  int dimension = 0;
  std::vector<int> null_modes;
  std::vector<double> sigma_min;  // smallest singular value per cosine mode k = 0..M
  double threshold = 0.0;
  HeightField kernel;  // unit norm, crest at q = 0; set when dimension == 1
};

// Smallest singular values are measured on the mode-k matrices scaled as
// discrete L2 operators; a mode counts as null below kKernelThreshold * dp.
inline constexpr double kKernelThreshold = 1.0;
KernelInfo kernel_at(double lambda, const LaminarFlow& flow, const PhysicalParams& params,
                     std::size_t n_q = kDefaultNq);

// Wavelength at which the discrete mode-k problem is singular (the grid's
// counterpart of k lambda*).
double discrete_lambda_star(const LaminarFlow& flow, const PhysicalParams& params,
                            double lambda_guess, int k = 1);
// Null vector f(p) cos(2 pi k q) of the discrete mode-k problem, unit norm, f(0) > 0.
HeightField discrete_kernel(const LaminarFlow& flow, const PhysicalParams& params,
                            std::size_t n_q, double lambda, int k = 1);
// Continuum kernel f_{1,*}(p) cos(2 pi q) sampled on the grid, unit norm.
HeightField shooting_kernel(const BifurcationPoint& bif, const LaminarFlow& flow,
                            std::size_t n_q);

// Range functional: int a^3 h* F + alpha C0 (1 + C0 lambda*^2) int phi tr0 h*,
// with F given on all p rows (layout as HeightField) and h* the shooting kernel.
double range_functional(const BifurcationPoint& bif, const LaminarFlow& flow,
                        const PhysicalParams& params, const std::vector<double>& F,
                        const PeriodicEvenFn& phi);

struct Transversality {
  double quadrature = 0.0;   // functional applied to the mixed derivative
  double closed_form = 0.0;  // lambda* ((g - alpha C0^2) f(0)^2 - int a^3 f'^2)
};
Transversality transversality(const LaminarFlow& flow, const PhysicalParams& params,
                              const BifurcationPoint& bif, std::size_t n_q = kDefaultNq);

struct NewtonOptions {
  double tol = 1e-10;
  int max_iter = 30;
  int max_halvings = 8;
  double fd_rel_step = 1e-7;
};

struct NewtonResult {
  HeightField field;  // field.lambda is the converged wavelength
  int iterations = 0;
  double residual = 0.0;
};

// Solves F(lambda, w) = 0, mean(tr0 w) = 0, <w, kernel> = s.
// Throws NumericalError when Newton does not converge.
NewtonResult newton_solve(const HeightField& initial, double s, const HeightField& kernel,
                          const LaminarFlow& flow, const PhysicalParams& params,
                          const NewtonOptions& opts = {});

struct BranchPoint {
  double s = 0.0;
  double lambda = 0.0;
  HeightField field;
  double residual_norm = 0.0;
  int iterations = 0;
};

struct Branch {
  std::vector<BranchPoint> points;
  bool complete = true;
  std::string note;
  double lambda_star_h = 0.0;
  HeightField kernel;
};

Branch continue_branch(const BifurcationPoint& bif, double s_max, int n_steps,
                       const LaminarFlow& flow, const PhysicalParams& params,
                       std::size_t n_q = kDefaultNq, const NewtonOptions& opts = {});

}  // namespace flexwave
