#include "flywheel/sweep.hpp"

#include "flywheel/errors.hpp"
#include "flywheel/io.hpp"
#include "flywheel/langevin.hpp"
#include "flywheel/rng.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <ctime>
#include <limits>
#include <memory>
#include <thread>

#ifndef FLYWHEEL_GIT_DESCRIBE
#define FLYWHEEL_GIT_DESCRIBE "unknown"
#endif

namespace flywheel {

namespace fs = std::filesystem;

namespace {

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string utc_now() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

// Standard error of the mean over batches; NaN when fewer than two values.
double batch_error(const std::vector<double>& values) {
  const std::size_t n = values.size();
  if (n < 2) return std::numeric_limits<double>::quiet_NaN();
  double mean = 0.0;
  for (double v : values) mean += v;
  mean /= static_cast<double>(n);
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  return std::sqrt(ss / static_cast<double>(n - 1) / static_cast<double>(n));
}

ThermoErrors batch_errors(const std::vector<ThermoReport>& batches, std::size_t expected) {
  ThermoErrors e;
  const double nan = std::numeric_limits<double>::quiet_NaN();
  if (batches.size() != expected) return {nan, nan, nan, nan, nan, nan};
  std::vector<double> nbar, energy, entropy, g2, we, wf;
  for (const auto& b : batches) {
    nbar.push_back(b.nbar);
    energy.push_back(b.energy);
    entropy.push_back(b.entropy);
    if (b.g2) g2.push_back(*b.g2);
    we.push_back(b.ergotropy);
    wf.push_back(b.free_energy_work);
  }
  e.nbar = batch_error(nbar);
  e.energy = batch_error(energy);
  e.entropy = batch_error(entropy);
  e.g2 = g2.size() == batches.size() ? batch_error(g2) : nan;
  e.ergotropy = batch_error(we);
  e.free_energy_work = batch_error(wf);
  return e;
}

double reference_beta(const DeviceParams& p, std::vector<std::string>& warnings) {
  if (p.left.inverse_temperature == p.right.inverse_temperature) return p.left.inverse_temperature;
  warnings.push_back("lead temperatures differ; free-energy reference uses the mean beta");
  return 0.5 * (p.left.inverse_temperature + p.right.inverse_temperature);
}

nlohmann::json report_json(const ThermoReport& r) {
  nlohmann::json j = {{"V", r.voltage},
                      {"omega0", r.omega0},
                      {"nbar", r.nbar},
                      {"U", r.energy},
                      {"S", r.entropy},
                      {"W_E", r.ergotropy},
                      {"W_F", r.free_energy_work},
                      {"W_E_over_omega0", r.ergotropy_in_omega0()},
                      {"W_F_over_omega0", r.free_energy_work_in_omega0()},
                      {"passive", r.passive},
                      {"above_threshold", r.above_threshold}};
  j["g2"] = r.g2 ? nlohmann::json(*r.g2) : nlohmann::json(nullptr);
  return j;
}

// NaN is not representable in JSON.
nlohmann::json number_or_null(double v) { return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr); }

std::string format_or_nan(double v) { return std::isfinite(v) ? io::format_double(v) : std::string("nan"); }

std::vector<std::string> list_files(const fs::path& root, const fs::path& dir) {
  std::vector<std::string> files;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.is_regular_file()) files.push_back(fs::relative(entry.path(), root).generic_string());
  }
  std::sort(files.begin(), files.end());
  return files;
}

}  // namespace

nlohmann::json VoltageResult::to_json() const {
  nlohmann::json j;
  j["V"] = voltage;
  j["seed"] = seed;
  j["status"] = ok ? "ok" : "failed";
  if (!ok) j["error"] = error;
  j["report"] = report_json(report);
  j["errors"] = {{"nbar", number_or_null(errors.nbar)},
                 {"U", number_or_null(errors.energy)},
                 {"S", number_or_null(errors.entropy)},
                 {"g2", number_or_null(errors.g2)},
                 {"W_E", number_or_null(errors.ergotropy)},
                 {"W_F", number_or_null(errors.free_energy_work)}};
  nlohmann::json batches = nlohmann::json::array();
  for (const auto& b : batch_reports) batches.push_back(report_json(b));
  j["batches"] = batches;
  j["negative_damping_interval"] =
      negative_damping ? nlohmann::json{negative_damping->first, negative_damping->second} : nlohmann::json(nullptr);
  j["nbar_wigner"] = nbar_wigner;
  j["radial_mode"] = radial_mode;
  j["clamp_fraction"] = clamp_fraction;
  j["outside_fraction"] = outside_fraction;
  j["asymmetry"] = asymmetry;
  j["clipped_mass"] = clipped_mass;
  j["n_max"] = n_max;
  j["extensions"] = extensions;
  j["table_extent"] = table_extent;
  j["grid_extent"] = grid_extent;
  j["warnings"] = warnings;
  return j;
}

std::string voltage_directory(double voltage) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "V_%.10g", voltage);
  return buf;
}

VoltageResult run_voltage(const RunConfig& config, double voltage, std::uint64_t seed, int table_workers) {
  const auto t0 = std::chrono::steady_clock::now();
  VoltageResult r;
  r.voltage = voltage;
  r.seed = seed;
  r.directory = voltage_directory(voltage);
  const fs::path dir = config.out_dir / r.directory;
  fs::create_directories(dir);

  const DeviceParams params = config.device.with_voltage(voltage);
  params.validate();
  const AdiabaticityReport adiabatic = check_adiabaticity(params);
  if (adiabatic.warning) r.warnings.push_back(adiabatic.message);

  IntegratorConfig ic = config.integrator;
  ic.seed = seed;
  const std::uint64_t total = ic.recorded_samples();
  const auto n_batches = static_cast<std::uint64_t>(config.batches);
  TableSpec table_spec = config.table;
  GridSpec grid_spec = config.grid;

  std::optional<CoefficientTable> table;
  std::vector<WignerAccumulator> batches;
  RunSummary summary;
  for (int attempt = 0;; ++attempt) {
    table.emplace(build_table(params, table_spec, table_workers));
    batches.assign(n_batches, WignerAccumulator(grid_spec));
    std::unique_ptr<io::GzipWriter> dump;
    std::string buffer;
    if (config.dump_trajectory) {
      dump = std::make_unique<io::GzipWriter>(dir / "trajectory.csv.gz");
      dump->write("t,x,v\n");
    }
    std::uint64_t k = 0;
    summary = run_streaming(ic, *table, [&](double t, double x, double v) {
      batches[std::min(n_batches - 1, k * n_batches / total)].add_physical(x, v, params);
      ++k;
      if (dump) {
        buffer += io::csv_row({io::format_double(t), io::format_double(x), io::format_double(v)});
        if (buffer.size() > (1u << 20)) {
          dump->write(buffer);
          buffer.clear();
        }
      }
    });
    if (dump) {
      dump->write(buffer);
      dump->close();
    }
    std::uint64_t outside = 0;
    for (const auto& b : batches) outside += b.outside();
    r.clamp_fraction = summary.clamp_fraction();
    r.outside_fraction = static_cast<double>(outside) / static_cast<double>(total);
    if (r.clamp_fraction <= kMaxClampFraction && r.outside_fraction <= kMaxOutsideFraction) break;
    if (attempt == config.max_extensions) {
      throw CoverageError("coverage still short after " + std::to_string(attempt) + " extensions (clamped " +
                          io::format_double(r.clamp_fraction) + ", outside grid " +
                          io::format_double(r.outside_fraction) + ")");
    }
    r.warnings.push_back("table extent " + io::format_double(table_spec.extent) + " x0 and grid extent " +
                         io::format_double(grid_spec.extent) + " doubled (clamped " +
                         io::format_double(r.clamp_fraction) + ", outside grid " +
                         io::format_double(r.outside_fraction) + ")");
    table_spec.extent *= 2.0;
    table_spec.n_points = 2 * (table_spec.n_points - 1) + 1;
    grid_spec.extent *= 2.0;
    grid_spec.bins = 2 * grid_spec.bins + 1;
    ++r.extensions;
  }
  r.table_extent = table_spec.extent;
  r.grid_extent = grid_spec.extent;
  for (const auto& w : summary.warnings) r.warnings.push_back(w);

  WignerAccumulator merged(grid_spec);
  for (const auto& b : batches) merged.merge(b);
  const WignerGrid grid = merged.finalize();
  const RadialProfile profile = radial_profile(grid, config.profile_bin_width);
  for (const auto& w : profile.warnings) r.warnings.push_back(w);
  const DiagonalState state = reconstruct_populations(profile, params.oscillator_frequency, config.reconstruction);
  for (const auto& w : state.warnings) r.warnings.push_back(w);

  r.negative_damping = find_negative_damping_interval(*table);
  const double beta = reference_beta(params, r.warnings);
  r.report = analyze(state, voltage, beta, r.negative_damping.has_value());
  r.nbar_wigner = grid.moments.nbar();
  r.radial_mode = profile.mode();
  r.asymmetry = profile.asymmetry;
  r.clipped_mass = state.negativity_clipped;
  r.n_max = state.n_max;

  // coverage was judged on the whole run; a single batch may lose more
  if (n_batches > 1) {
    for (std::uint64_t b = 0; b < n_batches; ++b) {
      try {
        const RadialProfile pb = radial_profile(batches[b].finalize(1.0), config.profile_bin_width);
        const DiagonalState sb = reconstruct_populations(pb, params.oscillator_frequency, config.reconstruction);
        r.batch_reports.push_back(analyze(sb, voltage, beta, r.report.above_threshold));
      } catch (const Error& e) {
        r.warnings.push_back("batch " + std::to_string(b) + " skipped: " + e.what());
      }
    }
  }
  r.errors = batch_errors(r.batch_reports, n_batches);

  table->save(dir / "coefficients.csv");
  grid.save(dir / "wigner.csv");
  profile.save(dir / "profile.csv");
  state.save(dir / "populations.csv", profile.asymmetry);
  r.ok = true;
  io::write_text(dir / "result.json", r.to_json().dump(2) + "\n");
  r.files = list_files(config.out_dir, dir);
  r.runtime_s = seconds_since(t0);
  return r;
}

SweepResult run_sweep(const RunConfig& config) {
  config.validate();
  try {
    fs::create_directories(config.out_dir);
  } catch (const fs::filesystem_error& e) {
    throw ConfigError("cannot create output directory: " + std::string(e.what()));
  }
  const std::string started_at = utc_now();

  const std::size_t n = config.voltages.size();
  std::vector<std::uint64_t> seeds(n);
  for (std::size_t i = 0; i < n; ++i) seeds[i] = derive_seed(config.master_seed, i);

  SweepResult out;
  out.voltages.resize(n);
  const int threads = static_cast<int>(std::min<std::size_t>(static_cast<std::size_t>(config.workers), n));
  const int table_workers = std::max(1, config.workers / threads);
  std::atomic<std::size_t> next{0};
  auto worker = [&]() {
    for (std::size_t i = next++; i < n; i = next++) {
      const auto t0 = std::chrono::steady_clock::now();
      try {
        out.voltages[i] = run_voltage(config, config.voltages[i], seeds[i], table_workers);
      } catch (const std::exception& e) {
        VoltageResult& r = out.voltages[i];
        r.voltage = config.voltages[i];
        r.seed = seeds[i];
        r.directory = voltage_directory(r.voltage);
        r.ok = false;
        r.error = e.what();
        r.runtime_s = seconds_since(t0);
        const fs::path dir = config.out_dir / r.directory;
        if (fs::exists(dir)) r.files = list_files(config.out_dir, dir);
      }
    }
  };
  std::vector<std::thread> pool;
  for (int t = 1; t < threads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();

  std::string summary = thermo_csv_header();
  std::string errors = "V,nbar_err,U_err,S_err,g2_err,W_E_err,W_F_err,nbar_W,radial_mode,clamp_fraction,"
                       "outside_fraction,asymmetry,clipped_mass,n_max\n";
  for (const auto& r : out.voltages) {
    if (!r.ok) {
      ++out.failures;
      continue;
    }
    summary += thermo_csv_row(r.report);
    errors += io::csv_row({io::format_double(r.voltage), format_or_nan(r.errors.nbar), format_or_nan(r.errors.energy),
                           format_or_nan(r.errors.entropy), format_or_nan(r.errors.g2),
                           format_or_nan(r.errors.ergotropy), format_or_nan(r.errors.free_energy_work),
                           io::format_double(r.nbar_wigner), io::format_double(r.radial_mode),
                           io::format_double(r.clamp_fraction), io::format_double(r.outside_fraction),
                           io::format_double(r.asymmetry), io::format_double(r.clipped_mass),
                           std::to_string(r.n_max)});
  }
  out.summary_path = config.out_dir / "sweep_summary.csv";
  io::write_text(out.summary_path, summary);
  io::write_text(config.out_dir / "sweep_errors.csv", errors);

  nlohmann::json manifest;
  manifest["config"] = config.to_json();
  manifest["seeds"] = seeds;
  manifest["git_describe"] = FLYWHEEL_GIT_DESCRIBE;
  manifest["started_at"] = started_at;
  nlohmann::json per_voltage = nlohmann::json::object();
  for (const auto& r : out.voltages) {
    nlohmann::json entry = {{"V", r.voltage},
                            {"seed", r.seed},
                            {"directory", r.directory},
                            {"status", r.ok ? "ok" : "failed"},
                            {"runtime_s", r.runtime_s}};
    if (!r.ok) entry["error"] = r.error;
    nlohmann::json files = nlohmann::json::array();
    for (const auto& f : r.files) files.push_back({{"path", f}, {"sha256", io::sha256_file(config.out_dir / f)}});
    entry["files"] = files;
    per_voltage[r.directory] = entry;
  }
  manifest["per_voltage"] = per_voltage;
  nlohmann::json top = nlohmann::json::array();
  for (const char* f : {"sweep_summary.csv", "sweep_errors.csv"}) {
    top.push_back({{"path", f}, {"sha256", io::sha256_file(config.out_dir / f)}});
  }
  manifest["files"] = top;
  out.manifest_path = config.out_dir / "manifest.json";
  io::write_text(out.manifest_path, manifest.dump(2) + "\n");
  return out;
}

std::vector<ThermoReport> reanalyze(const fs::path& out_dir, double beta) {
  const auto manifest = nlohmann::json::parse(io::read_text(out_dir / "manifest.json"));
  std::vector<std::pair<std::size_t, ThermoReport>> ordered;
  const auto& voltages = manifest.at("config").at("voltages");
  for (const auto& [key, entry] : manifest.at("per_voltage").items()) {
    if (entry.at("status") != "ok") continue;
    const fs::path dir = out_dir / entry.at("directory").get<std::string>();
    const auto result = nlohmann::json::parse(io::read_text(dir / "result.json"));
    const DiagonalState state = DiagonalState::load(dir / "populations.csv");
    const double v = result.at("V").get<double>();
    const bool above = result.at("report").at("above_threshold").get<bool>();
    std::size_t order = 0;
    while (order < voltages.size() && voltages[order].get<double>() != v) ++order;
    ordered.emplace_back(order, analyze(state, v, beta, above));
  }
  std::stable_sort(ordered.begin(), ordered.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
  std::vector<ThermoReport> reports;
  std::string csv = thermo_csv_header();
  for (const auto& [order, rep] : ordered) {
    csv += thermo_csv_row(rep);
    reports.push_back(rep);
  }
  io::write_text(out_dir / "analysis_summary.csv", csv);
  return reports;
}

}  // namespace flywheel
