#include "flywheel/validation.hpp"

#include "flywheel/coefficient_table.hpp"
#include "flywheel/electronic.hpp"
#include "flywheel/errors.hpp"
#include "flywheel/io.hpp"
#include "flywheel/langevin.hpp"

#include <cmath>
#include <sstream>

namespace flywheel {

namespace {

const char* status_name(CheckStatus s) {
  switch (s) {
    case CheckStatus::pass: return "pass";
    case CheckStatus::fail: return "fail";
    case CheckStatus::skipped: return "skipped";
  }
  return "?";
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

CheckResult sum_rule_check(const DeviceParams& p) {
  CheckResult c{"sum_rule V=" + fmt(p.voltage()), CheckStatus::pass, ""};
  double worst = 0.0;
  for (double k : {0.0, 2.0, -2.0}) {
    const double s = electronic::spectral_sum_rule(k * p.x0(), p);
    worst = std::max(worst, std::abs(s - 1.0));
  }
  c.detail = "max |sum - 1| = " + fmt(worst);
  if (!(worst <= 1e-6)) c.status = CheckStatus::fail;
  return c;
}

CheckResult fdt_check(const CoefficientTable& table) {
  const DeviceParams& p = table.params();
  const double expected = 2.0 / p.left.inverse_temperature;
  CheckResult c{"fdt_ratio", CheckStatus::pass, ""};
  double worst = 0.0;
  for (std::size_t i = 0; i < table.size(); ++i) {
    const double ratio = table.diffusion()[i] / (p.mass * table.damping()[i]);
    worst = std::max(worst, std::abs(ratio / expected - 1.0));
  }
  c.detail = "D/(m gamma) vs " + fmt(expected) + " at " + std::to_string(table.size()) +
             " nodes, max relative deviation " + fmt(worst);
  if (!(worst <= 0.02)) c.status = CheckStatus::fail;
  return c;
}

CheckResult detailed_balance_check(const DeviceParams& p) {
  CheckResult c{"detailed_balance", CheckStatus::pass, ""};
  const double beta = p.left.inverse_temperature;
  double worst = 0.0;
  for (double w : {0.1, 0.3, 1.0}) {
    for (double k : {0.0, 2.0, -2.0}) {
      const double x = k * p.x0();
      const double ratio = electronic::noise_spectrum(x, -w, p) / electronic::noise_spectrum(x, w, p);
      worst = std::max(worst, std::abs(ratio / std::exp(-beta * w) - 1.0));
    }
  }
  c.detail = "max relative deviation of S(-w)/S(w) from exp(-beta w): " + fmt(worst);
  if (!(worst <= 0.01)) c.status = CheckStatus::fail;
  return c;
}

CheckResult parity_check(const DeviceParams& p) {
  CheckResult c{"parity V=" + fmt(p.voltage()), CheckStatus::pass, ""};
  if (!p.is_mirror_symmetric()) {
    c.status = CheckStatus::skipped;
    c.detail = "parameters are not mirror symmetric";
    return c;
  }
  double worst = 0.0;
  for (double k : {0.5, 1.5, 3.0}) {
    const double x = k * p.x0();
    const auto plus = electronic::local_coefficients(x, p);
    const auto minus = electronic::local_coefficients(-x, p);
    worst = std::max(worst, std::abs(plus.occupation + minus.occupation));
    worst = std::max(worst, std::abs(plus.diffusion - minus.diffusion) / std::abs(plus.diffusion));
    worst = std::max(worst, std::abs(plus.damping - minus.damping) / std::max(std::abs(plus.damping), 1e-12));
  }
  c.detail = "max parity defect " + fmt(worst);
  if (!(worst <= 1e-6)) c.status = CheckStatus::fail;
  return c;
}

CheckResult damping_consistency_check(const DeviceParams& p) {
  CheckResult c{"damping_consistency V=" + fmt(p.voltage()), CheckStatus::pass, ""};
  try {
    for (double k : {0.0, 1.0, -1.0, 2.0, -2.0}) electronic::damping(k * p.x0(), p);
    c.detail = "analytic and finite-difference damping agree at 5 positions";
  } catch (const InconsistencyError& e) {
    c.status = CheckStatus::fail;
    c.detail = e.what();
  }
  return c;
}

template <class F>
CheckResult guarded(const std::string& name, F&& f) {
  try {
    return f();
  } catch (const std::exception& e) {
    return {name, CheckStatus::fail, e.what()};
  }
}

}  // namespace

bool ValidationReport::ok() const {
  for (const auto& c : checks) {
    if (c.status == CheckStatus::fail) return false;
  }
  return true;
}

nlohmann::json ValidationReport::to_json() const {
  nlohmann::json j;
  j["ok"] = ok();
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& c : checks) arr.push_back({{"name", c.name}, {"status", status_name(c.status)}, {"detail", c.detail}});
  j["checks"] = arr;
  j["warnings"] = warnings;
  return j;
}

std::string ValidationReport::to_text() const {
  std::ostringstream out;
  for (const auto& c : checks) out << status_name(c.status) << "  " << c.name << ": " << c.detail << "\n";
  for (const auto& w : warnings) out << "warning  " << w << "\n";
  return out.str();
}

ValidationReport validate_electronics(const RunConfig& config, int workers) {
  config.validate();
  ValidationReport report;
  const DeviceParams eq = config.device.with_voltage(0.0);

  std::vector<double> voltages = {0.0};
  for (double v : config.voltages) {
    if (v != 0.0) voltages.push_back(v);
  }
  for (double v : voltages) {
    const DeviceParams p = config.device.with_voltage(v);
    report.checks.push_back(guarded("sum_rule V=" + fmt(v), [&] { return sum_rule_check(p); }));
  }

  if (eq.is_equilibrium()) {
    report.checks.push_back(guarded("fdt_ratio", [&] { return fdt_check(build_table(eq, config.table, workers)); }));
    report.checks.push_back(guarded("detailed_balance", [&] { return detailed_balance_check(eq); }));
  } else {
    const std::string why = "leads at different temperatures, no equilibrium reference";
    report.checks.push_back({"fdt_ratio", CheckStatus::skipped, why});
    report.checks.push_back({"detailed_balance", CheckStatus::skipped, why});
  }

  for (double v : voltages) {
    const DeviceParams p = config.device.with_voltage(v);
    report.checks.push_back(guarded("parity V=" + fmt(v), [&] { return parity_check(p); }));
    report.checks.push_back(guarded("damping_consistency V=" + fmt(v), [&] { return damping_consistency_check(p); }));
  }

  const AdiabaticityReport adiabatic = check_adiabaticity(eq);
  if (adiabatic.warning) report.warnings.push_back(adiabatic.message);
  return report;
}

}  // namespace flywheel
