#pragma once

// Histogram estimate of the Wigner function in the scaled quadratures
// u = x/x0, w = p/p0 (alpha = u + i w), and its angular average.

#include "flywheel/device.hpp"

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace flywheel {

struct GridSpec {
  /// Half-width of the square grid in scaled units.
  double extent = 12.0;
  /// Bins per axis; odd so that one bin is centred on the origin.
  int bins = 201;

  /// Grid of the given extent at the default bin width.
  static GridSpec with_extent(double extent);
  double width() const { return 2.0 * extent / bins; }
  void validate() const;
};

/// Exact sample moments, accumulated alongside the histogram.
struct SampleMoments {
  std::uint64_t count = 0;
  double sum_u = 0.0;
  double sum_w = 0.0;
  double sum_uu = 0.0;
  double sum_ww = 0.0;
  double sum_r4 = 0.0;  // (u^2 + w^2)^2

  void merge(const SampleMoments& o);
  double mean_u() const { return sum_u / count; }
  double mean_w() const { return sum_w / count; }
  double mean_uu() const { return sum_uu / count; }
  double mean_ww() const { return sum_ww / count; }
  /// <u^2 + w^2> - 1/2, the symmetric-order estimate of <a^dagger a>.
  double nbar() const { return (sum_uu + sum_ww) / count - 0.5; }
};

struct WignerGrid {
  GridSpec spec;
  /// Row-major densities, index ix * bins + iw, in units of 1/(x0 p0).
  std::vector<double> density;
  std::uint64_t n_samples = 0;   // inside the grid
  std::uint64_t n_outside = 0;
  SampleMoments moments;         // all samples, including those outside

  double width() const { return spec.width(); }
  double center(int i) const { return -spec.extent + (i + 0.5) * width(); }
  double edge(int i) const { return -spec.extent + i * width(); }
  double at(int ix, int iw) const { return density[static_cast<std::size_t>(ix) * spec.bins + iw]; }
  /// Sum of W dx dp over the grid.
  double total_mass() const;
  /// Grid-based moments from bin centres.
  double mean_u() const;
  double mean_w() const;
  double mean_uu() const;
  double mean_ww() const;
  double nbar() const { return mean_uu() + mean_ww() - 0.5; }

  /// CSV "x,p,W" (bin centres, scaled units) plus a JSON sidecar.
  void save(const std::filesystem::path& csv_path) const;
};

/// Maximum fraction of samples allowed outside the grid.
inline constexpr double kMaxOutsideFraction = 1e-3;

class WignerAccumulator {
 public:
  explicit WignerAccumulator(GridSpec spec = {});

  /// Adds a sample already in scaled units.
  void add(double u, double w) {
    moments_.count++;
    moments_.sum_u += u;
    moments_.sum_w += w;
    const double uu = u * u;
    const double ww = w * w;
    moments_.sum_uu += uu;
    moments_.sum_ww += ww;
    moments_.sum_r4 += (uu + ww) * (uu + ww);
    const double fx = (u + spec_.extent) * inv_width_;
    const double fw = (w + spec_.extent) * inv_width_;
    if (!(fx >= 0.0 && fw >= 0.0 && fx < spec_.bins && fw < spec_.bins)) {
      ++outside_;
      return;
    }
    counts_[static_cast<std::size_t>(fx) * static_cast<std::size_t>(spec_.bins) + static_cast<std::size_t>(fw)]++;
  }

  /// Adds a physical (x, v) sample of the oscillator.
  void add_physical(double x, double v, const DeviceParams& params) {
    add(x / params.x0(), params.mass * v / params.p0());
  }

  /// Combines counts from another accumulator on the same grid.
  void merge(const WignerAccumulator& other);

  std::uint64_t total() const { return moments_.count; }
  std::uint64_t outside() const { return outside_; }
  double outside_fraction() const { return total() == 0 ? 0.0 : static_cast<double>(outside_) / total(); }
  const GridSpec& spec() const { return spec_; }

  /// Density-normalised grid. Throws CoverageError when more than
  /// max_outside of the samples fell outside, or when there are no samples.
  WignerGrid finalize(double max_outside = kMaxOutsideFraction) const;

 private:
  GridSpec spec_;
  double inv_width_;
  std::vector<std::uint64_t> counts_;
  std::uint64_t outside_ = 0;
  SampleMoments moments_;
};

struct RadialProfile {
  double bin_width = 0.1;
  std::vector<double> centers;
  std::vector<double> values;
  /// Angular asymmetry: max over 8 sectors of |m_k - mean| / mean.
  double asymmetry = 0.0;
  std::vector<std::string> warnings;

  /// 2 pi sum u W du.
  double norm() const;
  /// Centre of the bin with the largest W(u).
  double mode() const;

  /// CSV "u,W".
  void save(const std::filesystem::path& csv_path) const;
};

/// Asymmetry above which radial symmetry is considered violated.
inline constexpr double kMaxAsymmetry = 0.2;

/// Azimuthal average over rings of width bin_width. Each grid cell is split
/// into 8 x 8 sub-cells assigned by their centre radius; a ring's density is
/// its mass over the area of the sub-cells it received.
RadialProfile radial_profile(const WignerGrid& grid, double bin_width = 0.1);

/// Profile from a closed-form radial Wigner function, sampled at bin centres.
template <class F>
RadialProfile tabulate_profile(F&& w_of_u, double u_max, double bin_width) {
  RadialProfile p;
  p.bin_width = bin_width;
  const auto n = static_cast<std::size_t>(std::ceil(u_max / bin_width - 1e-9));
  for (std::size_t k = 0; k < n; ++k) {
    const double u = (static_cast<double>(k) + 0.5) * bin_width;
    p.centers.push_back(u);
    p.values.push_back(w_of_u(u));
  }
  return p;
}

}  // namespace flywheel
