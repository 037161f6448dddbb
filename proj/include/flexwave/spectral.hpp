#pragma once

#include <cstddef>
#include <span>
#include <vector>

// Cosine/sine calculus for 1-periodic functions sampled at q_j = j/N.
// Even and odd functions are stored by their half-period samples
// j = 0..M with M = N/2; odd data has zeros at j = 0 and j = M.
namespace flexwave::spectral {

// f(q) = sum_{k=0}^{M} c_k cos(2 pi k q)
std::vector<double> cos_coeffs(std::span<const double> half);
std::vector<double> cos_synth(std::span<const double> c);

// g(q) = sum_{k=1}^{M-1} s_k sin(2 pi k q); s_0 = s_M = 0
std::vector<double> sin_coeffs(std::span<const double> half);
std::vector<double> sin_synth(std::span<const double> s);

// Period mean (the k = 0 coefficient; trapezoid rule on the full period).
double mean(std::span<const double> even_half);

// even -> odd; the Nyquist mode has no derivative on the grid and is dropped.
std::vector<double> even_derivative(std::span<const double> half);
// even -> even
std::vector<double> even_second_derivative(std::span<const double> half);
// odd -> even
std::vector<double> odd_derivative(std::span<const double> half);
// odd -> even, value 0 at q = 0
std::vector<double> odd_antiderivative(std::span<const double> half);
// even -> odd; the mean is ignored
std::vector<double> even_antiderivative(std::span<const double> half);
// even -> even, int_0^q int_0^x f; the mean is ignored
std::vector<double> even_double_antiderivative(std::span<const double> half);

// Expand half-period samples to all N samples.
std::vector<double> full_from_even(std::span<const double> half);
std::vector<double> full_from_odd(std::span<const double> half);

// d^order/dq^order of a general 1-periodic function given by all N samples.
// Odd orders drop the Nyquist mode.
std::vector<double> periodic_derivative(std::span<const double> full, int order = 1);

// Max |c_k| over the upper quarter of the modes relative to max |c_k|.
double tail_ratio(std::span<const double> c);

}  // namespace flexwave::spectral
