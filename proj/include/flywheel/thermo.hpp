#pragma once

// Thermodynamic quantities of a state diagonal in the number basis of
// H_b = omega0 a^dagger a (no zero-point term).

#include "flywheel/reconstruction.hpp"

#include <optional>
#include <string>

namespace flywheel {

struct ThermoReport {
  double voltage = 0.0;
  double omega0 = 0.0;
  double nbar = 0.0;
  double energy = 0.0;
  double entropy = 0.0;
  std::optional<double> g2;  // empty for the vacuum
  double ergotropy = 0.0;
  double free_energy_work = 0.0;
  bool passive = true;
  bool above_threshold = false;

  double ergotropy_in_omega0() const { return ergotropy / omega0; }
  double free_energy_work_in_omega0() const { return free_energy_work / omega0; }
};

/// Ergotropy below which a state counts as passive.
inline constexpr double kPassiveTolerance = 1e-10;

/// sum n(n-1) p_n / (sum n p_n)^2. DomainError when nbar = 0.
double g2_zero(const DiagonalState& state);

/// -sum p ln p in nats.
double entropy(const DiagonalState& state);

double mean_energy(const DiagonalState& state);

/// sum_n omega0 n (p_n - p_n^sorted), populations sorted non-increasing.
double ergotropy(const DiagonalState& state);

/// U - S/beta + ln(Z)/beta with Z = 1 / (1 - exp(-beta omega0)).
double free_energy_work(const DiagonalState& state, double beta);

ThermoReport analyze(const DiagonalState& state, double voltage, double beta, bool above_threshold);

/// Row for the sweep summary, matching thermo_csv_header().
std::string thermo_csv_row(const ThermoReport& r);
std::string thermo_csv_header();

}  // namespace flywheel
