#pragma once

#include <string>

namespace flywheel {

/// One electrode: Lorentzian band, Fermi distribution. Units hbar = e = k_B = 1.
struct LeadSpec {
  double center_frequency = 0.0;    // band centre omega_alpha
  double bandwidth = 1.0;           // delta_alpha
  double coupling = 2.0;            // Gamma_alpha
  double inverse_temperature = 0.5; // beta_alpha
  double chemical_potential = 0.0;  // mu_alpha

  void validate(const std::string& name) const;
};

/// Full physical configuration of the dot + oscillator device.
///
/// The oscillator scales follow a = x/x0 + i p/p0 with
///   x0 = (2 / (m w0))^{1/2},  p0 = (2 m w0)^{1/2},  x0 * p0 = 2,
/// and the force per unit charge is F = 2 lambda / x0.
struct DeviceParams {
  double mass = 1.0;
  double oscillator_frequency = 0.2;
  double coupling_energy = 0.1;  // lambda
  double dot_energy = 0.0;       // epsilon
  LeadSpec left{0.5, 1.0, 2.0, 0.5, 0.0};
  LeadSpec right{-0.5, 1.0, 2.0, 0.5, 0.0};

  /// Reference device: w0 = 0.2, m = 1, lambda = 0.1, bands at +/-0.5 with
  /// delta = 1, Gamma = 2, beta = 0.5, and chemical potentials mu_L = -mu_R = voltage.
  static DeviceParams reference(double voltage = 0.0);

  /// Returns a copy with mu_L = +voltage, mu_R = -voltage.
  DeviceParams with_voltage(double voltage) const;
  /// Returns a copy with both lead temperatures set to 1/beta.
  DeviceParams with_inverse_temperature(double beta) const;

  double bias() const { return left.chemical_potential - right.chemical_potential; }
  /// Sweep voltage, i.e. mu_L for the symmetric bias convention.
  double voltage() const { return 0.5 * bias(); }
  double x0() const;
  double p0() const;
  double force_per_charge() const;
  /// Dot level at frozen position x: epsilon - F x.
  double level_at(double x) const { return dot_energy - force_per_charge() * x; }

  /// Throws ConfigError on violated invariants, including the half-filling
  /// condition epsilon = (mu_L + mu_R)/2 that the excess-charge definition relies on.
  void validate() const;

  /// Both leads share beta and the bias is zero.
  bool is_equilibrium() const;
  /// Parameters are invariant under the combined parity / particle-hole / L<->R map.
  bool is_mirror_symmetric(double tol = 1e-12) const;

  /// Stable hex digest of all fields; identifies cached coefficient tables.
  std::string fingerprint() const;
};

}  // namespace flywheel
