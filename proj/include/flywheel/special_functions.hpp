#pragma once

#include <span>

namespace flywheel::special {

/// Bessel function of the first kind, order zero. Backward (Miller) recurrence
/// for moderate arguments, Hankel asymptotic expansion for large ones.
double bessel_j0(double x);

/// Order one, same methods.
double bessel_j1(double x);

/// Laguerre polynomial L_n(x) by upward three-term recurrence.
double laguerre(int n, double x);

/// Fills out[k] = L_k(x) for k = 0 .. out.size() - 1.
void laguerre_sequence(double x, std::span<double> out);

}  // namespace flywheel::special
