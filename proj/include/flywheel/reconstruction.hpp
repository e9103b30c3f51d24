#pragma once

// Number-state populations of a radially symmetric Wigner function:
//   chi(r) = 2 pi int du u J0(2 r u) W(u)
//   p_n    = 2 int_0^{r_max} dr r chi(r) exp(-r^2/2) L_n(r^2)
// with W normalised as 2 pi int du u W(u) = 1 in the alpha = x/x0 + i p/p0 plane.

#include "flywheel/phase_space.hpp"

#include <string>
#include <vector>

namespace flywheel {

struct DiagonalState {
  std::vector<double> populations;      // clipped and renormalised
  std::vector<double> raw_populations;  // straight from the integrals
  double oscillator_frequency = 0.0;
  int n_max = 0;
  bool renormalization_applied = false;
  double negativity_clipped = 0.0;
  std::vector<std::string> warnings;

  /// Diagonal state from given populations, which must be non-negative with unit sum.
  static DiagonalState from_populations(std::vector<double> p, double omega0);

  /// CSV "n,p_n" plus JSON metadata (n_max, clipped mass, asymmetry).
  void save(const std::filesystem::path& csv_path, double asymmetry) const;
  static DiagonalState load(const std::filesystem::path& csv_path);
};

struct ReconstructionOptions {
  double r_max = 8.0;
  int nodes_per_panel = 20;
  int initial_panels = 16;
  int max_panels = 1 << 14;
  /// Convergence of the r quadrature: max |delta p_n| between panel doublings.
  double tolerance = 1e-10;
  int initial_n_max = 64;
  int max_n_max = 8192;
  /// Tail criterion |p_{n_max}| < tail_tolerance.
  double tail_tolerance = 1e-6;
  /// Clipped mass above which a warning is recorded.
  double clip_warning = 1e-2;
};

/// chi at each r, with W constant on each ring of the profile.
std::vector<double> characteristic_from_radial(const RadialProfile& profile, const std::vector<double>& r);
double characteristic_at(const RadialProfile& profile, double r);

/// Populations p_0 .. p_{n_max} through chi(r), before clipping.
std::vector<double> populations_staged(const RadialProfile& profile, int n_max, const ReconstructionOptions& opt = {});

/// Same integral with the r integration done first, in closed form over r in [0, inf).
std::vector<double> populations_fused(const RadialProfile& profile, int n_max, const ReconstructionOptions& opt = {});

/// Full reconstruction: n_max doubled from opt.initial_n_max until the tail
/// criterion holds, negatives clipped, renormalised. Doubling also stops, with a
/// warning, once n_max passes 2 u_edge^2 for the outermost non-empty ring u_edge:
/// populations that far out are the noise floor of a sampled profile.
/// TruncationError if opt.max_n_max is reached first.
DiagonalState reconstruct_populations(const RadialProfile& profile, double omega0,
                                      const ReconstructionOptions& opt = {});

double mean_occupation(const DiagonalState& state);

}  // namespace flywheel
