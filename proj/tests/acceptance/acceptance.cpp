// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fails.
//
//   acceptance [--steps N] [--out-dir DIR]

#include "flywheel/coefficient_table.hpp"
#include "flywheel/electronic.hpp"
#include "flywheel/errors.hpp"
#include "flywheel/io.hpp"
#include "flywheel/langevin.hpp"
#include "flywheel/reconstruction.hpp"
#include "flywheel/sweep.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <numbers>
#include <random>
#include <sstream>

#ifndef ACCEPTANCE_OUT_DIR
#define ACCEPTANCE_OUT_DIR "acceptance_out"
#endif

using namespace flywheel;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(double v, int digits = 4) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.*g", digits, v);
  return buf;
}

int failures = 0;

void report(int id, const std::function<Outcome()>& body) {
  Outcome o;
  try {
    o = body();
  } catch (const std::exception& e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  if (!o.pass) ++failures;
  std::printf("criterion %2d: %s  %s\n", id, o.pass ? "PASS" : "FAIL", o.detail.c_str());
  std::fflush(stdout);
}

// --- closed-form radial Wigner functions for the reconstruction oracles ---
constexpr double kPi = std::numbers::pi;
double thermal_w(double u, double nbar) {
  const double s = 2.0 * nbar + 1.0;
  return 2.0 / (kPi * s) * std::exp(-2.0 * u * u / s);
}
double coherent_ring_w(double u, double alpha2) {
  return 2.0 / kPi * std::exp(-2.0 * (u * u + alpha2)) * std::cyl_bessel_i(0.0, 4.0 * u * std::sqrt(alpha2));
}

double max_error(const std::vector<double>& p, const std::vector<double>& ref) {
  double e = 0.0;
  for (std::size_t n = 0; n < ref.size(); ++n) e = std::max(e, std::abs((n < p.size() ? p[n] : 0.0) - ref[n]));
  return e;
}

double combined(double a, double b) { return std::sqrt(a * a + b * b); }

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"acceptance criteria"};
  std::uint64_t steps = 250'000'000;
  std::string out_dir = ACCEPTANCE_OUT_DIR;
  int workers = 1;
  app.add_option("--steps", steps, "SDE steps per sweep voltage");
  app.add_option("--out-dir", out_dir, "scratch directory");
  app.add_option("--workers", workers, "threads for the sweep");
  CLI11_PARSE(app, argc, argv);

  const DeviceParams eq = DeviceParams::reference(0.0);
  const double x0 = eq.x0();
  const double omega0 = eq.oscillator_frequency;
  const double beta = eq.left.inverse_temperature;

  report(1, [&] {
    const CoefficientTable t = build_table(eq, TableSpec{}, workers);
    double worst = 0.0;
    for (std::size_t i = 0; i < t.size(); ++i) {
      worst = std::max(worst, std::abs(t.diffusion()[i] / (eq.mass * t.damping()[i]) / 4.0 - 1.0));
    }
    return Outcome{worst <= 0.02, "V=0: max |D/(m gamma)/4 - 1| = " + fmt(worst) + " over " +
                                      std::to_string(t.size()) + " nodes"};
  });

  report(2, [&] {
    double worst = 0.0;
    for (double w : {0.1, 0.3, 1.0}) {
      for (double k : {0.0, 2.0, -2.0}) {
        const double r = electronic::noise_spectrum(k * x0, -w, eq) / electronic::noise_spectrum(k * x0, w, eq);
        worst = std::max(worst, std::abs(r / std::exp(-beta * w) - 1.0));
      }
    }
    return Outcome{worst <= 0.01, "max |S(-w)/S(w) e^{beta w} - 1| = " + fmt(worst)};
  });

  report(3, [&] {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> ux(-20.0, 20.0);
    std::uniform_real_distribution<double> uv(0.0, 20.0);
    double worst = 0.0;
    for (int i = 0; i < 20; ++i) {
      const double x = ux(rng) * x0;
      const double v = uv(rng);
      worst = std::max(worst, std::abs(electronic::spectral_sum_rule(x, eq.with_voltage(v)) - 1.0));
    }
    return Outcome{worst <= 1e-6, "20 random (x, V): max |sum - 1| = " + fmt(worst)};
  });

  double vstar = std::nan("");
  report(4, [&] {
    std::ostringstream d;
    bool ok = true;
    for (double v : {0.0, 6.0, 15.0, 16.0}) {
      const auto interval = find_negative_damping_interval(build_table(eq.with_voltage(v), TableSpec{}, workers));
      const bool want = v != 0.0;
      ok = ok && (interval.has_value() == want);
      d << "V=" << v << (interval ? " gamma<0 " : " none ");
    }
    vstar = find_threshold_voltage(eq, 0.0, 6.0, TableSpec{}, 1e-3, workers);
    ok = ok && vstar > 0.0 && vstar < 6.0;
    d << "| V* = " << fmt(vstar);
    return Outcome{ok, d.str()};
  });

  // ---- the stochastic sweep behind criteria 5 to 9 ----
  RunConfig cfg = parse_config("");
  cfg.voltages = {0.0, 2.0, 4.0, 4.5, 6.0, 10.0, 15.0, 16.0};
  cfg.integrator = IntegratorConfig::with_steps(steps);
  cfg.out_dir = fs::path(out_dir) / "sweep";
  cfg.workers = workers;
  fs::remove_all(cfg.out_dir);
  const auto t0 = std::chrono::steady_clock::now();
  SweepResult sweep;
  std::string sweep_error;
  try {
    sweep = run_sweep(cfg);
  } catch (const std::exception& e) {
    sweep_error = e.what();
  }
  const double sweep_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  std::map<double, const VoltageResult*> at;
  for (const auto& r : sweep.voltages) {
    if (r.ok) at[r.voltage] = &r;
  }
  std::printf("# sweep: %llu steps per voltage, %.0f s\n", static_cast<unsigned long long>(steps), sweep_s);
  std::printf("# %6s %9s %8s %8s %7s %7s %10s %10s %10s %6s\n", "V", "nbar", "nbar_W", "mode", "g2", "+/-", "S",
              "W_E/w0", "W_F/w0", "clip");
  for (const auto& r : sweep.voltages) {
    if (!r.ok) {
      std::printf("# %6g failed: %s\n", r.voltage, r.error.c_str());
      continue;
    }
    std::printf("# %6g %9.4g %8.4g %8.3g %7.4g %7.2g %10.5g %10.4g %10.4g %6.2g\n", r.voltage, r.report.nbar,
                r.nbar_wigner, r.radial_mode, r.report.g2.value_or(std::nan("")), r.errors.g2, r.report.entropy,
                r.report.ergotropy_in_omega0(), r.report.free_energy_work_in_omega0(), r.clipped_mass);
  }
  std::fflush(stdout);
  auto need = [&](std::initializer_list<double> vs) {
    if (!sweep_error.empty()) throw Error("sweep failed: " + sweep_error);
    for (double v : vs) {
      if (!at.count(v)) throw Error("sweep point V=" + fmt(v) + " failed");
    }
  };

  report(5, [&] {
    need({0.0, 6.0, 16.0});
    const double m0 = at[0.0]->radial_mode;
    const double m6 = at[6.0]->radial_mode;
    const double m16 = at[16.0]->radial_mode;
    const bool ok = m0 <= 0.1 && m6 > 1.0 && m16 > m6;
    return Outcome{ok, "radial modes: V=0 " + fmt(m0) + " (want <= 0.1), V=6 " + fmt(m6) + " (want > 1), V=16 " +
                           fmt(m16) + " (want > V=6)"};
  });

  report(6, [&] {
    need({0.0, 16.0});
    const VoltageResult& a = *at[0.0];
    const VoltageResult& b = *at[16.0];
    if (!a.report.g2 || !b.report.g2) return Outcome{false, "g2 undefined"};
    const double g0 = *a.report.g2;
    const double g16 = *b.report.g2;
    const double err = a.errors.g2 + b.errors.g2;
    const bool ok = std::abs(g0 - 2.0) <= 0.2 && g16 >= 1.3 && g16 <= 1.7 && g0 - g16 > err;
    return Outcome{ok, "g2(0) = " + fmt(g0) + " +/- " + fmt(a.errors.g2, 2) + ", g2(16) = " + fmt(g16) + " +/- " +
                           fmt(b.errors.g2, 2) + ", drop " + fmt(g0 - g16) + " vs errors " + fmt(err, 2)};
  });

  report(7, [&] {
    need({0.0, 2.0, 4.0, 4.5, 10.0, 16.0});
    std::ostringstream d;
    bool ok = true;
    double worst_below = 0.0;
    for (const auto& r : sweep.voltages) {
      if (r.ok && r.voltage < vstar) worst_below = std::max(worst_below, r.report.ergotropy_in_omega0());
    }
    ok = ok && worst_below < 1e-3;
    d << "max W_E/w0 below V* = " << fmt(worst_below) << " (want < 1e-3)";
    const double w16 = at[16.0]->report.ergotropy_in_omega0();
    ok = ok && w16 > 0.1;
    d << "; W_E/w0 at V = 4.5, 10, 16:";
    const double chain[] = {4.5, 10.0, 16.0};
    bool monotone = true;
    for (int i = 0; i < 3; ++i) {
      const VoltageResult& q = *at[chain[i]];
      d << " " << fmt(q.report.ergotropy_in_omega0()) << " +/- " << fmt(q.errors.ergotropy / omega0, 2);
      if (i == 0) continue;
      const VoltageResult& p = *at[chain[i - 1]];
      const double tol = 3.0 * combined(p.errors.ergotropy, q.errors.ergotropy);
      monotone = monotone && q.report.ergotropy + tol >= p.report.ergotropy;
    }
    ok = ok && monotone && vstar < 4.5;
    d << (monotone ? " (non-decreasing from V=4.5)" : " (decreasing beyond 3 sigma)");
    return Outcome{ok, d.str()};
  });

  report(8, [&] {
    need({4.0});
    bool ordered = true;
    for (const auto& r : sweep.voltages) {
      if (r.ok) ordered = ordered && r.report.ergotropy >= 0.0 && r.report.ergotropy <= r.report.free_energy_work;
    }
    const double wf4 = at[4.0]->report.free_energy_work;
    const bool ok = ordered && wf4 > 0.0 && 4.0 < vstar;
    return Outcome{ok, std::string("0 <= W_E <= W_F at every point: ") + (ordered ? "yes" : "no") +
                           "; W_F/w0 at V=4 (below V*) = " + fmt(wf4 / omega0)};
  });

  report(9, [&] {
    const double chain[] = {0.0, 2.0, 4.0, 6.0, 10.0, 16.0};
    need({0.0, 2.0, 4.0, 6.0, 10.0, 16.0});
    std::ostringstream d;
    bool monotone = true;
    d << "S:";
    for (int i = 0; i < 6; ++i) {
      d << " " << fmt(at[chain[i]]->report.entropy);
      if (i > 0) {
        const VoltageResult& p = *at[chain[i - 1]];
        const VoltageResult& q = *at[chain[i]];
        monotone = monotone && q.report.entropy + 3.0 * combined(p.errors.entropy, q.errors.entropy) >= p.report.entropy;
      }
    }
    const double s0 = at[0.0]->report.entropy;
    const double s6 = at[6.0]->report.entropy;
    const double s10 = at[10.0]->report.entropy;
    const double s16 = at[16.0]->report.entropy;
    const double early = (s6 - s0) / s0;
    const double late = (s16 - s10) / s10;
    d << "; relative change 0->6 " << fmt(early) << ", 10->16 " << fmt(late);
    return Outcome{monotone && late < early, d.str()};
  });

  report(10, [&] {
    const RadialProfile th = tabulate_profile([](double u) { return thermal_w(u, 2.0); }, 14.0, 0.02);
    const RadialProfile ring = tabulate_profile([](double u) { return coherent_ring_w(u, 4.0); }, 10.0, 0.02);
    const RadialProfile vac = tabulate_profile([](double u) { return thermal_w(u, 0.0); }, 8.0, 0.02);
    std::vector<double> geo, poi;
    for (int n = 0; n <= 20; ++n) geo.push_back(std::pow(2.0, n) / std::pow(3.0, n + 1));
    for (int n = 0; n <= 40; ++n) poi.push_back(std::exp(n * std::log(4.0) - 4.0 - std::lgamma(n + 1.0)));
    const double e_th = max_error(reconstruct_populations(th, omega0).populations, geo);
    const double e_po = max_error(reconstruct_populations(ring, omega0).populations, poi);
    const double p0 = reconstruct_populations(vac, omega0).populations[0];
    const bool ok = e_th < 1e-3 && e_po < 5e-3 && std::abs(p0 - 1.0) <= 1e-3;
    return Outcome{ok, "thermal max error " + fmt(e_th) + ", Poisson max error " + fmt(e_po) + ", vacuum p0 = " +
                           fmt(p0, 8)};
  });

  report(11, [&] {
    const double gamma0 = 0.05;
    const double d0 = 0.01;
    const DeviceParams p = eq;
    IntegratorConfig ic = IntegratorConfig::with_steps(10'000'000, 11);
    const Trajectory t = run(ic, FrozenCoefficients{0.0, d0, gamma0}, p);
    const double m = p.mass;
    const double var_x = d0 / (2.0 * m * m * gamma0 * omega0 * omega0);
    const double var_v = d0 / (2.0 * m * m * gamma0);
    const std::size_t batches = 20;
    const std::size_t len = t.positions.size() / batches;
    std::vector<double> bx, bv;
    for (std::size_t b = 0; b < batches; ++b) {
      double sx = 0.0;
      double sv = 0.0;
      for (std::size_t i = b * len; i < (b + 1) * len; ++i) {
        sx += t.positions[i] * t.positions[i];
        sv += t.velocities[i] * t.velocities[i];
      }
      bx.push_back(sx / len);
      bv.push_back(sv / len);
    }
    auto mean_err = [](const std::vector<double>& v) {
      double m = 0.0;
      for (double x : v) m += x;
      m /= v.size();
      double ss = 0.0;
      for (double x : v) ss += (x - m) * (x - m);
      return std::pair{m, std::sqrt(ss / (v.size() - 1) / v.size())};
    };
    const auto [mx, ex] = mean_err(bx);
    const auto [mv, ev] = mean_err(bv);
    const bool ok = std::abs(mx - var_x) <= 3.0 * ex && std::abs(mv - var_v) <= 3.0 * ev;
    return Outcome{ok, "Var(x) = " + fmt(mx) + " +/- " + fmt(ex, 2) + " (exact " + fmt(var_x) + "), Var(v) = " +
                           fmt(mv) + " +/- " + fmt(ev, 2) + " (exact " + fmt(var_v) + ")"};
  });

  report(12, [&] {
    auto small = [&](const std::string& name, int w) {
      RunConfig c = parse_config("");
      c.voltages = {0.0, 6.0, 16.0};
      c.integrator = IntegratorConfig::with_steps(2'000'000);
      c.out_dir = fs::path(out_dir) / name;
      c.workers = w;
      fs::remove_all(c.out_dir);
      return io::read_text(run_sweep(c).summary_path);
    };
    const std::string a = small("determinism_a", 1);
    const std::string b = small("determinism_b", 1);
    const std::string c = small("determinism_4", 4);
    const bool ok = a == b && a == c;
    return Outcome{ok, std::string("repeat identical: ") + (a == b ? "yes" : "no") +
                           ", 1 vs 4 workers identical: " + (a == c ? "yes" : "no") + ", summary sha256 " +
                           io::sha256_hex(a).substr(0, 16)};
  });

  std::printf("%d of 12 criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
