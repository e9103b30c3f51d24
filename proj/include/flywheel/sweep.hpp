#pragma once

// Voltage sweep: table, Langevin run, Wigner histogram, populations and
// thermodynamics for each voltage, written under RunConfig::out_dir.

#include "flywheel/config.hpp"
#include "flywheel/thermo.hpp"

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace flywheel {

/// Batch-means standard errors of the report quantities.
struct ThermoErrors {
  double nbar = 0.0;
  double energy = 0.0;
  double entropy = 0.0;
  double g2 = 0.0;
  double ergotropy = 0.0;
  double free_energy_work = 0.0;
};

struct VoltageResult {
  double voltage = 0.0;
  std::uint64_t seed = 0;
  bool ok = false;
  std::string error;
  double runtime_s = 0.0;
  std::string directory;  // relative to out_dir

  ThermoReport report;
  ThermoErrors errors;
  std::vector<ThermoReport> batch_reports;
  std::optional<std::pair<double, double>> negative_damping;
  double nbar_wigner = 0.0;  // from the sample moments
  double radial_mode = 0.0;
  double clamp_fraction = 0.0;
  double outside_fraction = 0.0;
  double asymmetry = 0.0;
  double clipped_mass = 0.0;
  int n_max = 0;
  int extensions = 0;
  double table_extent = 0.0;
  double grid_extent = 0.0;
  std::vector<std::string> warnings;
  std::vector<std::string> files;  // relative to out_dir

  nlohmann::json to_json() const;
};

struct SweepResult {
  std::vector<VoltageResult> voltages;  // in config order
  int failures = 0;
  std::filesystem::path summary_path;
  std::filesystem::path manifest_path;
};

/// Directory name for one voltage, e.g. "V_16" or "V_4.5".
std::string voltage_directory(double voltage);

/// Full pipeline for one voltage; writes into out_dir / voltage_directory(V).
/// Throws on failure.
VoltageResult run_voltage(const RunConfig& config, double voltage, std::uint64_t seed, int table_workers);

/// Runs every voltage on config.workers threads. Per-voltage failures are
/// recorded and do not stop the others.
SweepResult run_sweep(const RunConfig& config);

/// Recomputes thermodynamics from stored populations under out_dir and writes
/// analysis_summary.csv. Returns the reports in manifest order.
std::vector<ThermoReport> reanalyze(const std::filesystem::path& out_dir, double beta);

}  // namespace flywheel
