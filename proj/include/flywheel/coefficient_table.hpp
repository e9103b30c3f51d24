#pragma once

// Position-grid tables of <n>_x, D(x), gamma(x) with cubic-spline lookup.

#include "flywheel/device.hpp"
#include "flywheel/electronic.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace flywheel {

struct CoefficientSample {
  double occupation = 0.0;
  double diffusion = 0.0;
  double damping = 0.0;
  bool clamped = false;
};

/// Lookup statistics kept by the caller so that tables stay immutable.
struct ClampCounter {
  std::uint64_t lookups = 0;
  std::uint64_t clamped = 0;
  double fraction() const { return lookups == 0 ? 0.0 : static_cast<double>(clamped) / lookups; }
};

struct TableSpec {
  /// Grid range in units of x0.
  double extent = 12.0;
  int n_points = 256;
};

class CoefficientTable {
 public:
  /// Nodes must be uniformly spaced and strictly increasing, at least 16 of them.
  CoefficientTable(DeviceParams params, std::vector<double> positions, std::vector<double> occupation,
                   std::vector<double> diffusion, std::vector<double> damping);

  const DeviceParams& params() const { return params_; }
  const std::string& fingerprint() const { return fingerprint_; }
  const std::vector<double>& positions() const { return x_; }
  const std::vector<double>& occupation() const { return n_; }
  const std::vector<double>& diffusion() const { return d_; }
  const std::vector<double>& damping() const { return g_; }
  std::size_t size() const { return x_.size(); }
  double x_min() const { return x_.front(); }
  double x_max() const { return x_.back(); }
  /// Spline order; always 3.
  int interpolation_order() const { return 3; }

  /// Not-a-knot cubic spline inside the grid; edge values outside (flagged).
  CoefficientSample lookup(double x) const;
  CoefficientSample lookup(double x, ClampCounter& counter) const {
    CoefficientSample s = lookup(x);
    ++counter.lookups;
    if (s.clamped) ++counter.clamped;
    return s;
  }

  /// CSV "x,n_excess,D,gamma" plus a JSON sidecar with the parameters.
  void save(const std::filesystem::path& csv_path) const;
  /// Reads a table written by save(); rejects a sidecar whose fingerprint does
  /// not match its own parameters.
  static CoefficientTable load(const std::filesystem::path& csv_path);
  static std::filesystem::path sidecar_path(const std::filesystem::path& csv_path);

 private:
  DeviceParams params_;
  std::string fingerprint_;
  std::vector<double> x_, n_, d_, g_;
  std::vector<double> mn_, md_, mg_;  // spline second derivatives
  double h_ = 0.0;
};

/// Evaluates the electronic coefficients on n_points uniform nodes over
/// [x_min, x_max] using up to `workers` threads.
CoefficientTable build_table(const DeviceParams& params, double x_min, double x_max, int n_points,
                             int workers = 1, const electronic::Settings& settings = {});

/// Symmetric grid of +/- spec.extent * x0.
CoefficientTable build_table(const DeviceParams& params, const TableSpec& spec, int workers = 1,
                             const electronic::Settings& settings = {});

/// Longest contiguous interval on which the interpolated damping is negative.
std::optional<std::pair<double, double>> find_negative_damping_interval(const CoefficientTable& table);

/// Bisection on the voltage for the onset of a negative-damping interval.
/// Requires none at v_lo and one at v_hi.
double find_threshold_voltage(const DeviceParams& base, double v_lo, double v_hi, const TableSpec& spec,
                              double tolerance = 1e-3, int workers = 1);

}  // namespace flywheel
