#pragma once

// Run configuration, read from an INI file:
//
//   [device]       mass, omega0, lambda, epsilon, beta (both leads)
//   [lead_left]    omega, delta, gamma, beta
//   [lead_right]   omega, delta, gamma, beta
//   [sweep]        voltages (comma list), seed, workers, batches, out_dir, dump_trajectory, max_extensions
//   [integrator]   dt, steps, burn_in, record_stride, initial_x, initial_v, scheme
//   [table]        extent, points
//   [grid]         extent, bins, profile_bin_width
//   [reconstruction] n_max, max_n_max, r_max, tail_tolerance
//
// Every key is optional; the defaults are the reference device.

#include "flywheel/coefficient_table.hpp"
#include "flywheel/device.hpp"
#include "flywheel/langevin.hpp"
#include "flywheel/phase_space.hpp"
#include "flywheel/reconstruction.hpp"

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <vector>

namespace flywheel {

struct RunConfig {
  DeviceParams device = DeviceParams::reference(0.0);
  std::vector<double> voltages{0.0, 6.0, 16.0};
  IntegratorConfig integrator;
  TableSpec table;
  GridSpec grid;
  double profile_bin_width = 0.1;
  ReconstructionOptions reconstruction;
  /// Consecutive segments of each run, for batch-means error bars.
  int batches = 10;
  std::filesystem::path out_dir = "flywheel_out";
  std::uint64_t master_seed = 20240917;
  int workers = 1;
  bool dump_trajectory = false;
  /// How often table and grid extents may be doubled when coverage is short.
  int max_extensions = 3;

  /// Throws ConfigError on invalid values.
  void validate() const;
  nlohmann::json to_json() const;
};

RunConfig load_config(const std::filesystem::path& path);
RunConfig parse_config(const std::string& ini_text);

}  // namespace flywheel
