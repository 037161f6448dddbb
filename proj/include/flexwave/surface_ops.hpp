#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "flexwave/laminar.hpp"

namespace flexwave {

// Even 1-periodic function stored by its samples at q_j = j/N, j = 0..N/2.
struct PeriodicEvenFn {
  std::vector<double> half;

  PeriodicEvenFn() = default;
  explicit PeriodicEvenFn(std::vector<double> v);
  static PeriodicEvenFn from_function(std::size_t N, const std::function<double(double)>& f);
  static PeriodicEvenFn zero(std::size_t N);

  std::size_t N() const { return 2 * (half.size() - 1); }
  std::size_t M() const { return half.size() - 1; }
  std::vector<double> samples() const;  // all N samples
  std::vector<double> cos_coeffs() const;
  double mean() const;
};

// Odd 1-periodic function, same half-period layout (zeros at both ends).
struct PeriodicOddFn {
  std::vector<double> half;
};

struct SurfaceTraces {
  PeriodicEvenFn h0;   // tr0 h
  PeriodicOddFn h0_q;  // derivative of tr0 h
  PeriodicEvenFn hp0;  // tr0 h_p
  double lambda = 1.0;

  // h0_q is formed spectrally from h0.
  static SurfaceTraces make(PeriodicEvenFn h0, PeriodicEvenFn hp0, double lambda);
  // Traces of the laminar flow itself: h0 = 0, hp0 = H'(0).
  static SurfaceTraces laminar(const LaminarFlow& flow, std::size_t N, double lambda);
};

std::vector<double> omega_of(std::span<const double> slope);

struct PlateResult {
  PeriodicEvenFn value;
  bool resolved = true;  // spectral tail of zeta below 1e-10 of its largest mode
};

// Bending operator in the periodic variable:
// w^-1 [w^-1 (w^-3 z'')']' + (w^-3 z'')^3 / 2 with w = omega(z').
PlateResult plate_H(const PeriodicEvenFn& zeta);

// (1 - d^2/dq^2)^{-1} on zero-mean even functions.
PeriodicEvenFn helmholtz_inv(const PeriodicEvenFn& f);

PeriodicEvenFn op_B(const SurfaceTraces& traces, const PhysicalParams& params);

// int_0^q int_0^x B - (5/2) int_0^q z' z''^2 w^-7, z = zeta.
PeriodicEvenFn phi_from(const PeriodicEvenFn& B, const PeriodicEvenFn& zeta);
PeriodicEvenFn op_Phi(const SurfaceTraces& traces, const PhysicalParams& params);

// Nonlocal boundary operator. With require_zero_mean the trace h0 must have
// zero mean (|mean| <= 1e-12); without it a nonzero mean passes through
// unchanged, which is what a Newton iterate needs.
PeriodicEvenFn op_Psi(const SurfaceTraces& traces, const PhysicalParams& params,
                      bool require_zero_mean = true);

}  // namespace flexwave
