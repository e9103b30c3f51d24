#include "flywheel/thermo.hpp"

#include "flywheel/errors.hpp"
#include "flywheel/io.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

namespace flywheel {

double g2_zero(const DiagonalState& state) {
  double first = 0.0;
  double second = 0.0;
  for (std::size_t n = 0; n < state.populations.size(); ++n) {
    const double nn = static_cast<double>(n);
    first += nn * state.populations[n];
    second += nn * (nn - 1.0) * state.populations[n];
  }
  if (!(first > 0.0)) throw DomainError("g2(0) is undefined for the vacuum");
  return second / (first * first);
}

double entropy(const DiagonalState& state) {
  double s = 0.0;
  for (double p : state.populations) {
    if (p > 0.0) s -= p * std::log(p);
  }
  return s;
}

double mean_energy(const DiagonalState& state) { return state.oscillator_frequency * mean_occupation(state); }

double ergotropy(const DiagonalState& state) {
  std::vector<double> sorted = state.populations;
  std::sort(sorted.begin(), sorted.end(), std::greater<>());
  double w = 0.0;
  for (std::size_t n = 0; n < sorted.size(); ++n) w += static_cast<double>(n) * (state.populations[n] - sorted[n]);
  return std::max(0.0, state.oscillator_frequency * w);
}

double free_energy_work(const DiagonalState& state, double beta) {
  if (!(beta > 0.0)) throw ConfigError("free_energy_work needs beta > 0");
  const double log_z = -std::log1p(-std::exp(-beta * state.oscillator_frequency));
  return mean_energy(state) - entropy(state) / beta + log_z / beta;
}

ThermoReport analyze(const DiagonalState& state, double voltage, double beta, bool above_threshold) {
  ThermoReport r;
  r.voltage = voltage;
  r.omega0 = state.oscillator_frequency;
  r.nbar = mean_occupation(state);
  r.energy = mean_energy(state);
  r.entropy = entropy(state);
  try {
    r.g2 = g2_zero(state);
  } catch (const DomainError&) {
    r.g2.reset();
  }
  r.ergotropy = ergotropy(state);
  r.free_energy_work = free_energy_work(state, beta);
  r.passive = r.ergotropy <= kPassiveTolerance;
  r.above_threshold = above_threshold;
  return r;
}

std::string thermo_csv_header() { return "V,nbar,U,S,g2,W_E,W_F,passive,above_threshold\n"; }

std::string thermo_csv_row(const ThermoReport& r) {
  return io::csv_row({io::format_double(r.voltage), io::format_double(r.nbar), io::format_double(r.energy),
                      io::format_double(r.entropy), r.g2 ? io::format_double(*r.g2) : std::string("nan"),
                      io::format_double(r.ergotropy), io::format_double(r.free_energy_work), r.passive ? "1" : "0",
                      r.above_threshold ? "1" : "0"});
}

}  // namespace flywheel
