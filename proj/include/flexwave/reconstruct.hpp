#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "flexwave/continuation.hpp"
#include "flexwave/laminar.hpp"

namespace flexwave {

// Physical fields in the moving frame over one full period, x_j = lambda j / N_q,
// on the streamline grid p_i. Node (i, j) sits at (x_j, y(i, j)).
struct WaveSolution {
  double lambda = 0.0;
  double Q = 0.0;  // Bernoulli constant
  double E = 0.0;  // energy constant, Q / 2
  std::size_t n_q = 0;
  std::size_t n_p = 0;
  std::vector<double> x;    // n_q
  std::vector<double> p;    // n_p
  std::vector<double> eta;  // n_q
  std::vector<double> y, u, v, P;  // n_p * n_q, row-major in p

  std::size_t idx(std::size_t i, std::size_t j) const { return i * n_q + j; }
};

// u = -1/h_p, v = -h_q/(lambda h_p), P from the energy constant.
// Throws DomainError when h_p <= 0 somewhere.
WaveSolution fields_from_height(const HeightField& field, const LaminarFlow& flow,
                                const PhysicalParams& params);

// Period mean of |grad psi|^2 on the surface.
double bernoulli_Q(const HeightField& field, const LaminarFlow& flow);

// Bending operator H(eta) in the physical variable for one period of samples
// of a lambda-periodic surface (no symmetry assumed).
std::vector<double> bending_operator(std::span<const double> eta, double lambda);

struct ResidualEntry {
  std::string name;
  double value = 0.0;
  double tol = 0.0;
  bool pass() const { return value <= tol; }
};

struct ResidualReport {
  std::vector<ResidualEntry> entries;
  double dp = 0.0;
  double grid_tol = 0.0;
  bool all_pass() const;
  const ResidualEntry* first_failure() const;
  const ResidualEntry& get(const std::string& name) const;
};

// Grid tolerance for differential residuals: 1e-9 + kGridTolConstant * max|eta| * dp^2.
inline constexpr double kGridTolConstant = 100.0;
double grid_tolerance(double dp, double eta_amplitude);

// Residuals of the velocity, stream-function and height-function formulations,
// evaluated by finite differences in p and spectral differences in q, with the
// laminar part of each field differentiated exactly.
ResidualReport euler_residual(const WaveSolution& sol, const LaminarFlow& flow,
                              const PhysicalParams& params);

struct ProfileDiagnostics {
  double crest_x = 0.0;
  double trough_x = 0.0;
  bool monotone = false;
  bool degenerate = false;  // no strict extrema
  double symmetry_defect = 0.0;
  double mean = 0.0;
};

ProfileDiagnostics profile_diagnostics(std::span<const double> eta, double lambda);

}  // namespace flexwave
