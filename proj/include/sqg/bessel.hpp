#pragma once

#include <vector>

namespace sqg {

/// J_n(x) for integer n >= 0, x >= 0.
double bessel_j(int n, double x);

/// d/dx J_n(x).
double bessel_j_derivative(int n, double x);

/// J_n(x) / x, finite at x = 0.
double bessel_j_over_x(int n, double x);

/// Positive zeros of J_n that are <= upper, ascending. Zeros are bracketed
/// by a sign-change scan and refined by bisection to machine precision.
/// Throws Error(numeric) if a bracket fails to converge.
std::vector<double> bessel_j_zeros_below(int n, double upper);

/// First `count` positive zeros of J_n.
std::vector<double> bessel_j_zeros(int n, int count);

}  // namespace sqg
