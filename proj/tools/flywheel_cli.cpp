#include "flywheel/coefficient_table.hpp"
#include "flywheel/config.hpp"
#include "flywheel/errors.hpp"
#include "flywheel/io.hpp"
#include "flywheel/sweep.hpp"
#include "flywheel/validation.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>

namespace fs = std::filesystem;
using namespace flywheel;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitPartial = 2;
constexpr int kExitConfig = 3;

struct Overrides {
  std::string config_path;
  std::string out_dir;
  std::optional<std::uint64_t> seed;
  std::optional<std::uint64_t> steps;
  std::optional<int> workers;
};

RunConfig resolve(const Overrides& o) {
  RunConfig c = o.config_path.empty() ? parse_config("") : load_config(o.config_path);
  if (!o.out_dir.empty()) c.out_dir = o.out_dir;
  if (o.seed) c.master_seed = *o.seed;
  if (o.steps) {
    c.integrator.n_steps = *o.steps;
    c.integrator.burn_in_steps = *o.steps / 10;
  }
  if (o.workers) c.workers = *o.workers;
  c.validate();
  return c;
}

int cmd_sweep(const RunConfig& c) {
  const SweepResult r = run_sweep(c);
  for (const auto& v : r.voltages) {
    if (v.ok) {
      std::printf("V=%-8g nbar=%-10.4g g2=%-8.4g W_E/w0=%-10.4g W_F/w0=%-10.4g %s%s  (%.1f s)\n", v.voltage,
                  v.report.nbar, v.report.g2 ? *v.report.g2 : std::nan(""), v.report.ergotropy_in_omega0(),
                  v.report.free_energy_work_in_omega0(), v.report.passive ? "passive" : "active",
                  v.report.above_threshold ? ", above threshold" : "", v.runtime_s);
      for (const auto& w : v.warnings) std::printf("    warning: %s\n", w.c_str());
    } else {
      std::printf("V=%-8g FAILED: %s\n", v.voltage, v.error.c_str());
    }
  }
  std::printf("summary: %s\nmanifest: %s\n", r.summary_path.c_str(), r.manifest_path.c_str());
  return r.failures == 0 ? kExitOk : kExitPartial;
}

int cmd_validate(const RunConfig& c) {
  const ValidationReport r = validate_electronics(c, c.workers);
  std::cout << r.to_text();
  fs::create_directories(c.out_dir);
  io::write_text(c.out_dir / "validation.json", r.to_json().dump(2) + "\n");
  return r.ok() ? kExitOk : kExitPartial;
}

int cmd_coeffs(const RunConfig& c, bool threshold) {
  fs::create_directories(c.out_dir);
  int failures = 0;
  for (double v : c.voltages) {
    try {
      const CoefficientTable t = build_table(c.device.with_voltage(v), c.table, c.workers);
      const fs::path dir = c.out_dir / voltage_directory(v);
      fs::create_directories(dir);
      t.save(dir / "coefficients.csv");
      const auto interval = find_negative_damping_interval(t);
      if (interval) {
        std::printf("V=%-8g gamma < 0 on [%.6g, %.6g]\n", v, interval->first, interval->second);
      } else {
        std::printf("V=%-8g gamma >= 0 everywhere\n", v);
      }
    } catch (const Error& e) {
      std::printf("V=%-8g FAILED: %s\n", v, e.what());
      ++failures;
    }
  }
  if (threshold) {
    double hi = 0.0;
    for (double v : c.voltages) hi = std::max(hi, v);
    try {
      const double vstar = find_threshold_voltage(c.device, 0.0, hi, c.table, 1e-3, c.workers);
      std::printf("threshold voltage V* = %.6g\n", vstar);
    } catch (const Error& e) {
      std::printf("threshold search failed: %s\n", e.what());
      ++failures;
    }
  }
  return failures == 0 ? kExitOk : kExitPartial;
}

int cmd_analyze(const RunConfig& c) {
  const double beta = c.device.left.inverse_temperature;
  const auto reports = reanalyze(c.out_dir, beta);
  for (const auto& r : reports) {
    std::printf("V=%-8g nbar=%-10.4g S=%-8.4g W_E/w0=%-10.4g W_F/w0=%-10.4g %s\n", r.voltage, r.nbar, r.entropy,
                r.ergotropy_in_omega0(), r.free_energy_work_in_omega0(), r.passive ? "passive" : "active");
  }
  std::printf("wrote %s\n", (c.out_dir / "analysis_summary.csv").c_str());
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Langevin model of a voltage-driven nanomechanical flywheel"};
  app.require_subcommand(1);
  app.fallthrough();
  Overrides o;
  app.add_option("--config", o.config_path, "INI run configuration")->check(CLI::ExistingFile);
  app.add_option("--out-dir", o.out_dir, "output directory");
  app.add_option("--seed", o.seed, "master seed");
  app.add_option("--steps", o.steps, "SDE steps per voltage (burn-in is 10%)");
  app.add_option("--workers", o.workers, "worker threads")->check(CLI::PositiveNumber);

  auto* sweep = app.add_subcommand("sweep", "run the full pipeline over the configured voltages");
  auto* validate = app.add_subcommand("validate", "electronic consistency checks, no SDE");
  auto* coeffs = app.add_subcommand("coeffs", "coefficient tables only");
  bool threshold = false;
  coeffs->add_flag("--threshold", threshold, "also bisect for the threshold voltage");
  auto* analyze = app.add_subcommand("analyze", "recompute thermodynamics from stored populations");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kExitConfig;
  }

  try {
    const RunConfig c = resolve(o);
    if (sweep->parsed()) return cmd_sweep(c);
    if (validate->parsed()) return cmd_validate(c);
    if (coeffs->parsed()) return cmd_coeffs(c, threshold);
    if (analyze->parsed()) return cmd_analyze(c);
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "configuration error: %s\n", e.what());
    return kExitConfig;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitPartial;
  }
  return kExitConfig;
}
