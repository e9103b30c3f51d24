#include "flywheel/langevin.hpp"

#include "flywheel/io.hpp"

#include <fftw3.h>

#include <algorithm>
#include <complex>
#include <mutex>

namespace flywheel {

IntegratorConfig IntegratorConfig::with_steps(std::uint64_t n_steps, std::uint64_t seed) {
  IntegratorConfig c;
  c.n_steps = n_steps;
  c.burn_in_steps = n_steps / 10;
  c.seed = seed;
  return c;
}

void IntegratorConfig::validate(const DeviceParams& params, double max_abs_damping) const {
  if (!(time_step > 0.0) || !std::isfinite(time_step)) throw ConfigError("time_step must be positive");
  if (!(time_step * params.oscillator_frequency < 0.05)) {
    throw ConfigError("time_step * w0 = " + io::format_double(time_step * params.oscillator_frequency) +
                      " must stay below 0.05");
  }
  if (!(time_step * max_abs_damping < 0.1)) {
    throw ConfigError("time_step * max|gamma| = " + io::format_double(time_step * max_abs_damping) +
                      " must stay below 0.1");
  }
  if (n_steps <= burn_in_steps) throw ConfigError("n_steps must exceed burn_in_steps");
  if (record_stride == 0) throw ConfigError("record_stride must be positive");
  if (!std::isfinite(initial_x) || !std::isfinite(initial_v)) throw ConfigError("initial state must be finite");
}

namespace {

template <class Source>
Trajectory collect(const IntegratorConfig& config, Source&& source) {
  Trajectory t;
  const auto n = static_cast<std::size_t>(config.n_steps > config.burn_in_steps ? config.recorded_samples() : 0);
  t.times.reserve(n);
  t.positions.reserve(n);
  t.velocities.reserve(n);
  const RunSummary s = source([&](double time, double x, double v) {
    t.times.push_back(time);
    t.positions.push_back(x);
    t.velocities.push_back(v);
  });
  t.clamp_count = s.clamp_count;
  t.steps_taken = s.steps_taken;
  t.seed = config.seed;
  t.warnings = s.warnings;
  return t;
}

// The FFTW planner is not thread safe.
std::mutex& fftw_planner_mutex() {
  static std::mutex m;
  return m;
}

}  // namespace

Trajectory run(const IntegratorConfig& config, const CoefficientTable& table) {
  return collect(config, [&](auto&& sink) { return run_streaming(config, table, sink); });
}

Trajectory run(const IntegratorConfig& config, const FrozenCoefficients& frozen, const DeviceParams& params) {
  return collect(config, [&](auto&& sink) { return run_streaming(config, frozen, params, sink); });
}

std::vector<double> autocovariance(const std::vector<double>& series, std::size_t max_lag) {
  const std::size_t n = series.size();
  if (n < 2) throw ConfigError("autocovariance needs at least two samples");
  if (max_lag > n / 2) throw ConfigError("max_lag exceeds half the record length");
  double mean = 0.0;
  for (double v : series) mean += v;
  mean /= static_cast<double>(n);

  // Zero padding to >= 2n turns the circular correlation into the linear one.
  std::size_t size = 1;
  while (size < 2 * n) size <<= 1;
  const std::size_t half = size / 2 + 1;
  double* in = fftw_alloc_real(size);
  fftw_complex* spec = fftw_alloc_complex(half);
  fftw_plan forward = nullptr;
  fftw_plan backward = nullptr;
  {
    std::lock_guard<std::mutex> lock(fftw_planner_mutex());
    forward = fftw_plan_dft_r2c_1d(static_cast<int>(size), in, spec, FFTW_ESTIMATE);
    backward = fftw_plan_dft_c2r_1d(static_cast<int>(size), spec, in, FFTW_ESTIMATE);
  }
  for (std::size_t i = 0; i < size; ++i) in[i] = i < n ? series[i] - mean : 0.0;
  fftw_execute(forward);
  for (std::size_t k = 0; k < half; ++k) {
    spec[k][0] = spec[k][0] * spec[k][0] + spec[k][1] * spec[k][1];
    spec[k][1] = 0.0;
  }
  fftw_execute(backward);
  std::vector<double> c(max_lag + 1);
  const double norm = 1.0 / (static_cast<double>(size) * static_cast<double>(n));
  for (std::size_t k = 0; k <= max_lag; ++k) c[k] = in[k] * norm;
  {
    std::lock_guard<std::mutex> lock(fftw_planner_mutex());
    fftw_destroy_plan(forward);
    fftw_destroy_plan(backward);
  }
  fftw_free(in);
  fftw_free(spec);
  return c;
}

AdiabaticityReport check_adiabaticity(const DeviceParams& params) {
  AdiabaticityReport r;
  r.electronic_scale = std::min({1.0 / params.left.inverse_temperature, 1.0 / params.right.inverse_temperature,
                                 params.left.coupling, params.right.coupling});
  r.mechanical_scale = std::max(params.oscillator_frequency, std::abs(params.coupling_energy));
  r.ratio = r.electronic_scale / r.mechanical_scale;
  r.warning = r.ratio < 5.0;
  if (r.warning) {
    r.message = "quasi-adiabatic condition weak: min(1/beta, Gamma) / max(w0, |lambda|) = " +
                io::format_double(r.ratio);
  }
  return r;
}

}  // namespace flywheel
