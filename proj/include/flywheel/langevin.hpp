#pragma once

// Stochastic integration of
//   m x'' + m gamma(x) x' + m w0^2 x = F <n>_x + xi(t),  <xi(t) xi(t')> = D(x) delta(t - t').

#include "flywheel/coefficient_table.hpp"
#include "flywheel/device.hpp"
#include "flywheel/errors.hpp"
#include "flywheel/rng.hpp"

#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

namespace flywheel {

enum class StepScheme {
  /// v first, then x with the updated v. Stable for the weakly damped oscillator.
  symplectic_euler,
  /// x advanced with the old v. Pumps energy at a rate ~ w0^2 dt.
  explicit_euler,
};

struct IntegratorConfig {
  double time_step = 0.01;
  std::uint64_t n_steps = 10'000'000;
  std::uint64_t burn_in_steps = 1'000'000;
  std::uint64_t seed = 1;
  std::uint32_t record_stride = 10;
  double initial_x = 0.0;
  double initial_v = 0.0;
  StepScheme scheme = StepScheme::symplectic_euler;

  /// n_steps total with the default 10% burn-in.
  static IntegratorConfig with_steps(std::uint64_t n_steps, std::uint64_t seed = 1);

  /// Throws ConfigError unless dt > 0, dt w0 < 0.05, dt max|gamma| < 0.1 and n_steps > burn_in_steps.
  void validate(const DeviceParams& params, double max_abs_damping) const;
  std::uint64_t recorded_samples() const { return (n_steps - burn_in_steps) / record_stride; }
};

struct PhasePoint {
  double x = 0.0;
  double v = 0.0;
};

/// One Euler step with noise increment dW ~ N(0, dt).
inline PhasePoint step(PhasePoint s, const CoefficientSample& c, const DeviceParams& params, double dt, double dW,
                       StepScheme scheme = StepScheme::symplectic_euler) {
  const double w0 = params.oscillator_frequency;
  const double accel = -w0 * w0 * s.x - c.damping * s.v + params.force_per_charge() * c.occupation / params.mass;
  const double v_new = s.v + accel * dt + std::sqrt(std::max(c.diffusion, 0.0)) / params.mass * dW;
  const double x_new = s.x + (scheme == StepScheme::symplectic_euler ? v_new : s.v) * dt;
  return {x_new, v_new};
}

/// Position-independent coefficients, for testing against closed forms.
struct FrozenCoefficients {
  double occupation = 0.0;
  double diffusion = 0.0;
  double damping = 0.0;
};

struct Trajectory {
  std::vector<double> times;
  std::vector<double> positions;
  std::vector<double> velocities;
  std::uint64_t clamp_count = 0;
  std::uint64_t steps_taken = 0;
  std::uint64_t seed = 0;
  std::vector<std::string> warnings;

  double clamp_fraction() const {
    return steps_taken == 0 ? 0.0 : static_cast<double>(clamp_count) / static_cast<double>(steps_taken);
  }
};

/// Summary of a streamed run whose samples went to a sink instead of memory.
struct RunSummary {
  std::uint64_t clamp_count = 0;
  std::uint64_t steps_taken = 0;
  std::uint64_t samples = 0;
  PhasePoint final_state;
  std::vector<std::string> warnings;

  double clamp_fraction() const {
    return steps_taken == 0 ? 0.0 : static_cast<double>(clamp_count) / static_cast<double>(steps_taken);
  }
};

/// Clamp fraction above which a run is flagged and the table grid should grow.
inline constexpr double kMaxClampFraction = 1e-3;

namespace detail {

template <class Lookup, class Sink>
RunSummary integrate(const IntegratorConfig& config, const DeviceParams& params, Lookup&& lookup, Sink&& sink) {
  Xoshiro256pp gen(config.seed);
  std::normal_distribution<double> normal(0.0, std::sqrt(config.time_step));
  PhasePoint s{config.initial_x, config.initial_v};
  RunSummary out;
  const double dt = config.time_step;
  std::uint32_t countdown = config.record_stride;
  for (std::uint64_t i = 0; i < config.n_steps; ++i) {
    const CoefficientSample c = lookup(s.x);
    out.clamp_count += c.clamped ? 1 : 0;
    s = step(s, c, params, dt, normal(gen), config.scheme);
    if (!std::isfinite(s.x) || !std::isfinite(s.v)) throw IntegrationError("non-finite oscillator state", i);
    if (i >= config.burn_in_steps && --countdown == 0) {
      countdown = config.record_stride;
      sink(static_cast<double>(i + 1) * dt, s.x, s.v);
      ++out.samples;
    }
  }
  out.steps_taken = config.n_steps;
  out.final_state = s;
  if (out.clamp_fraction() > kMaxClampFraction) {
    out.warnings.push_back("coefficient table clamped on " + std::to_string(out.clamp_count) + " of " +
                           std::to_string(out.steps_taken) + " steps");
  }
  return out;
}

}  // namespace detail

/// Streams every recorded (t, x, v) after burn-in to sink.
template <class Sink>
RunSummary run_streaming(const IntegratorConfig& config, const CoefficientTable& table, Sink&& sink) {
  double max_gamma = 0.0;
  for (double g : table.damping()) max_gamma = std::max(max_gamma, std::abs(g));
  config.validate(table.params(), max_gamma);
  return detail::integrate(config, table.params(), [&](double x) { return table.lookup(x); }, sink);
}

template <class Sink>
RunSummary run_streaming(const IntegratorConfig& config, const FrozenCoefficients& frozen, const DeviceParams& params,
                         Sink&& sink) {
  config.validate(params, std::abs(frozen.damping));
  const CoefficientSample c{frozen.occupation, frozen.diffusion, frozen.damping, false};
  return detail::integrate(config, params, [&](double) { return c; }, sink);
}

Trajectory run(const IntegratorConfig& config, const CoefficientTable& table);
Trajectory run(const IntegratorConfig& config, const FrozenCoefficients& frozen, const DeviceParams& params);

/// Sample autocovariance C(k) = (1/N) sum_t (x_t - xbar)(x_{t+k} - xbar), k = 0 .. max_lag,
/// in units of recorded samples. Throws ConfigError if max_lag > N/2.
std::vector<double> autocovariance(const std::vector<double>& series, std::size_t max_lag);

/// Position autocovariance of a trajectory at lags 0 .. max_lag recorded samples.
inline std::vector<double> position_autocorrelation(const Trajectory& trajectory, std::size_t max_lag) {
  return autocovariance(trajectory.positions, max_lag);
}

struct AdiabaticityReport {
  double electronic_scale = 0.0;   // min(1/beta, Gamma) over both leads
  double mechanical_scale = 0.0;   // max(w0, |lambda|)
  double ratio = 0.0;
  bool warning = false;
  std::string message;
};

/// Compares electronic and mechanical energy scales; warns when the ratio is below 5.
AdiabaticityReport check_adiabaticity(const DeviceParams& params);

}  // namespace flywheel
