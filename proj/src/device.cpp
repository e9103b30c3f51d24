#include "flywheel/device.hpp"

#include "flywheel/errors.hpp"
#include "flywheel/io.hpp"

#include <cmath>

namespace flywheel {

namespace {

void require_positive(double value, const std::string& what) {
  if (!(value > 0.0) || !std::isfinite(value)) {
    throw ConfigError(what + " must be positive and finite (got " + io::format_double(value) + ")");
  }
}

void require_finite(double value, const std::string& what) {
  if (!std::isfinite(value)) throw ConfigError(what + " must be finite");
}

bool close(double a, double b, double tol) { return std::abs(a - b) <= tol * (1.0 + std::abs(a)); }

}  // namespace

void LeadSpec::validate(const std::string& name) const {
  require_finite(center_frequency, name + ".center_frequency");
  require_positive(bandwidth, name + ".bandwidth");
  require_positive(coupling, name + ".coupling");
  require_positive(inverse_temperature, name + ".inverse_temperature");
  require_finite(chemical_potential, name + ".chemical_potential");
}

DeviceParams DeviceParams::reference(double voltage) { return DeviceParams{}.with_voltage(voltage); }

DeviceParams DeviceParams::with_voltage(double voltage) const {
  DeviceParams p = *this;
  p.left.chemical_potential = voltage;
  p.right.chemical_potential = -voltage;
  return p;
}

DeviceParams DeviceParams::with_inverse_temperature(double beta) const {
  DeviceParams p = *this;
  p.left.inverse_temperature = beta;
  p.right.inverse_temperature = beta;
  return p;
}

double DeviceParams::x0() const { return std::sqrt(2.0 / (mass * oscillator_frequency)); }

double DeviceParams::p0() const { return std::sqrt(2.0 * mass * oscillator_frequency); }

double DeviceParams::force_per_charge() const { return 2.0 * coupling_energy / x0(); }

void DeviceParams::validate() const {
  require_positive(mass, "mass");
  require_positive(oscillator_frequency, "oscillator_frequency");
  require_finite(coupling_energy, "coupling_energy");
  require_finite(dot_energy, "dot_energy");
  left.validate("left");
  right.validate("right");
  const double half_filling = 0.5 * (left.chemical_potential + right.chemical_potential);
  if (!close(dot_energy, half_filling, 1e-12)) {
    throw ConfigError("dot_energy must equal (mu_L + mu_R)/2 = " + io::format_double(half_filling) +
                      " so that the uncoupled dot is half filled");
  }
}

bool DeviceParams::is_equilibrium() const {
  return left.chemical_potential == right.chemical_potential &&
         left.inverse_temperature == right.inverse_temperature;
}

bool DeviceParams::is_mirror_symmetric(double tol) const {
  return std::abs(dot_energy) <= tol &&
         close(left.chemical_potential, -right.chemical_potential, tol) &&
         close(left.center_frequency, -right.center_frequency, tol) &&
         close(left.bandwidth, right.bandwidth, tol) && close(left.coupling, right.coupling, tol) &&
         close(left.inverse_temperature, right.inverse_temperature, tol);
}

std::string DeviceParams::fingerprint() const {
  std::string canon;
  for (double v : {mass, oscillator_frequency, coupling_energy, dot_energy, left.center_frequency,
                   left.bandwidth, left.coupling, left.inverse_temperature, left.chemical_potential,
                   right.center_frequency, right.bandwidth, right.coupling, right.inverse_temperature,
                   right.chemical_potential}) {
    canon += io::format_double(v);
    canon += ';';
  }
  return io::sha256_hex(canon).substr(0, 16);
}

}  // namespace flywheel
