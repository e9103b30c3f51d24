#pragma once

// Frozen-position electronic steady state of a resonant level between two
// Lorentzian leads: Green function, excess charge, charge-noise spectrum and
// the diffusion / damping coefficients that drive the oscillator.
//
// Frequency convention: S_x(w) = F^2 sum_{a,b} int dw'/2pi A(w') A(w'+w)
//   k_a(w') f_a(w') k_b(w'+w) [1 - f_b(w'+w)],
// so that S_x(-w) = exp(-beta w) S_x(w) in equilibrium, D = S_x(0) and
// m gamma = dS_x/dw at w = 0 (positive in equilibrium).

#include "flywheel/device.hpp"
#include "flywheel/quadrature.hpp"

#include <complex>

namespace flywheel::electronic {

struct Settings {
  quad::Options quadrature{1e-16, 1e-11, 4000};
  /// Maximum allowed |int dw/2pi A (k_L + k_R) - 1|.
  double sum_rule_tolerance = 1e-6;
  /// Frequency step of the finite-difference damping cross-check.
  double fd_step = 1e-4;
  /// Relative agreement required between analytic and finite-difference damping.
  double damping_rel_tolerance = 5e-3;
  /// Agreement is only enforced when |gamma| exceeds this fraction of D/m.
  double damping_noise_floor = 1e-6;
};

/// Fermi-Dirac occupation, evaluated without overflow for any beta (w - mu).
double fermi(double omega, double mu, double beta);

/// Lorentzian level-width function Gamma delta^2 / ((w - w_a)^2 + delta^2).
double spectral_density(double omega, const LeadSpec& lead);

/// Retarded self-energy of a Lorentzian lead; Im part equals -spectral_density/2.
std::complex<double> self_energy(double omega, const LeadSpec& lead);

/// Retarded dot Green function at frozen oscillator position x.
std::complex<double> green_function(double omega, double x, const DeviceParams& params);

/// A(w) = |G(w)|^2.
double spectral_function(double omega, double x, const DeviceParams& params);

/// int dw/2pi A(w) [k_L(w) + k_R(w)]; equals 1 analytically.
double spectral_sum_rule(double x, const DeviceParams& params, const Settings& settings = {});

/// <c^dagger c>_x - 1/2. Throws QuadratureError if the sum rule computed in the
/// same pass misses 1 by more than settings.sum_rule_tolerance.
double excess_occupation(double x, const DeviceParams& params, const Settings& settings = {});

/// Charge-noise spectrum of the force, S_x(w) >= 0.
double noise_spectrum(double x, double omega, const DeviceParams& params, const Settings& settings = {});

/// D(x) = S_x(0), evaluated through a dedicated zero-frequency integral.
double diffusion(double x, const DeviceParams& params, const Settings& settings = {});

/// gamma(x) = (1/m) dS_x/dw at w = 0 from the analytically differentiated integrand.
double damping_analytic(double x, const DeviceParams& params, const Settings& settings = {});

/// gamma(x) from a central difference of noise_spectrum at +/- settings.fd_step.
double damping_finite_difference(double x, const DeviceParams& params, const Settings& settings = {});

/// Analytic damping, cross-checked against the finite difference; throws
/// InconsistencyError when they disagree beyond tolerance.
double damping(double x, const DeviceParams& params, const Settings& settings = {});

struct LocalCoefficients {
  double occupation = 0.0;  // excess charge <n>_x
  double diffusion = 0.0;   // D(x)
  double damping = 0.0;     // gamma(x)
};

/// All three Langevin coefficients at x, sharing work between them.
LocalCoefficients local_coefficients(double x, const DeviceParams& params, const Settings& settings = {});

}  // namespace flywheel::electronic
