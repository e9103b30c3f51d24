#include "flywheel/special_functions.hpp"

#include <cmath>
#include <numbers>
#include <utility>

namespace flywheel::special {

namespace {

constexpr double kAsymptoticFrom = 50.0;

// Returns J0 and J1 together.
std::pair<double, double> miller(double x) {
  // Start well above x so the minimal solution dominates, then normalise with
  // J0 + 2 (J2 + J4 + ...) = 1.
  int start = static_cast<int>(x + 30.0 + 2.0 * std::cbrt(x * 40.0));
  if (start % 2 != 0) ++start;
  double next = 0.0;
  double cur = 1e-300;
  double even_sum = 0.0;
  for (int k = start; k >= 1; --k) {
    const double prev = 2.0 * k / x * cur - next;
    next = cur;
    cur = prev;
    if ((k - 1) % 2 == 0 && k - 1 > 0) even_sum += cur;
    // keep the recurrence inside double range
    if (std::abs(cur) > 1e250) {
      cur *= 1e-250;
      next *= 1e-250;
      even_sum *= 1e-250;
    }
  }
  const double norm = cur + 2.0 * even_sum;
  return {cur / norm, next / norm};
}

// Hankel expansion with four terms in each of P and Q; mu = 4 nu^2.
double hankel_asymptotic(int nu, double x) {
  const double mu = 4.0 * nu * nu;
  double a[8];
  a[0] = 1.0;
  for (int k = 1; k < 8; ++k) a[k] = a[k - 1] * (mu - (2.0 * k - 1.0) * (2.0 * k - 1.0)) / (k * 8.0);
  const double y = 1.0 / x;
  double p = 0.0;
  double q = 0.0;
  for (int k = 3; k >= 0; --k) {
    p = p * y * y + ((k % 2 == 0) ? a[2 * k] : -a[2 * k]);
    q = q * y * y + ((k % 2 == 0) ? a[2 * k + 1] : -a[2 * k + 1]);
  }
  q *= y;
  const double phase = x - (0.5 * nu + 0.25) * std::numbers::pi;
  return std::sqrt(2.0 / (std::numbers::pi * x)) * (p * std::cos(phase) - q * std::sin(phase));
}

}  // namespace

double bessel_j0(double x) {
  x = std::abs(x);
  if (x < 1e-8) return 1.0 - 0.25 * x * x;
  if (x < kAsymptoticFrom) return miller(x).first;
  return hankel_asymptotic(0, x);
}

double bessel_j1(double x) {
  const double sign = x < 0.0 ? -1.0 : 1.0;
  x = std::abs(x);
  if (x < 1e-8) return sign * 0.5 * x;
  if (x < kAsymptoticFrom) return sign * miller(x).second;
  return sign * hankel_asymptotic(1, x);
}

double laguerre(int n, double x) {
  if (n <= 0) return 1.0;
  double prev = 1.0;
  double cur = 1.0 - x;
  for (int k = 1; k < n; ++k) {
    const double next = ((2.0 * k + 1.0 - x) * cur - k * prev) / (k + 1.0);
    prev = cur;
    cur = next;
  }
  return cur;
}

void laguerre_sequence(double x, std::span<double> out) {
  if (out.empty()) return;
  out[0] = 1.0;
  if (out.size() == 1) return;
  out[1] = 1.0 - x;
  for (std::size_t k = 1; k + 1 < out.size(); ++k) {
    const double kk = static_cast<double>(k);
    out[k + 1] = ((2.0 * kk + 1.0 - x) * out[k] - kk * out[k - 1]) / (kk + 1.0);
  }
}

}  // namespace flywheel::special
