#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "flywheel/electronic.hpp"
#include "flywheel/langevin.hpp"

#include <array>
#include <cmath>
#include <numeric>
#include <random>

using namespace flywheel;

namespace {

double mean(const std::vector<double>& v) { return std::accumulate(v.begin(), v.end(), 0.0) / v.size(); }

double variance(const std::vector<double>& v) {
  const double m = mean(v);
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return s / v.size();
}

// Batched-means estimate and its standard error.
std::pair<double, double> batched(const std::vector<double>& values, int batches) {
  const std::size_t per = values.size() / batches;
  std::vector<double> means;
  for (int b = 0; b < batches; ++b) {
    double s = 0.0;
    for (std::size_t i = 0; i < per; ++i) s += values[b * per + i];
    means.push_back(s / per);
  }
  const double m = mean(means);
  double var = 0.0;
  for (double x : means) var += (x - m) * (x - m);
  var /= (batches - 1);
  return {m, std::sqrt(var / batches)};
}

// Stationary covariance of dx = v dt, dv = (-w^2 x - g v) dt + s dW from the
// continuous Lyapunov equation A S + S A^T + B B^T = 0, solved as a 3x3 system.
std::array<double, 3> lyapunov(double w, double g, double s2) {
  // unknowns (Sxx, Sxv, Svv)
  double m[3][4] = {{0.0, 2.0, 0.0, 0.0}, {-w * w, -g, 1.0, 0.0}, {0.0, -2.0 * w * w, -2.0 * g, -s2}};
  for (int c = 0; c < 3; ++c) {
    int piv = c;
    for (int r = c + 1; r < 3; ++r)
      if (std::abs(m[r][c]) > std::abs(m[piv][c])) piv = r;
    for (int k = 0; k < 4; ++k) std::swap(m[c][k], m[piv][k]);
    for (int r = 0; r < 3; ++r) {
      if (r == c) continue;
      const double f = m[r][c] / m[c][c];
      for (int k = 0; k < 4; ++k) m[r][k] -= f * m[c][k];
    }
  }
  return {m[0][3] / m[0][0], m[1][3] / m[1][1], m[2][3] / m[2][2]};
}

// Envelope decay rate of an autocovariance: slope of log(max |C| per period).
double envelope_rate(const std::vector<double>& c, std::size_t period, double lag_time) {
  std::vector<double> t, y;
  for (std::size_t start = 0; start + period < c.size(); start += period) {
    double peak = 0.0;
    for (std::size_t k = start; k < start + period; ++k) peak = std::max(peak, std::abs(c[k]));
    t.push_back(lag_time * (start + period / 2));
    y.push_back(std::log(peak / c[0]));
  }
  const double tm = mean(t), ym = mean(y);
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < t.size(); ++i) {
    num += (t[i] - tm) * (y[i] - ym);
    den += (t[i] - tm) * (t[i] - tm);
  }
  return -num / den;
}

}  // namespace

TEST_CASE("deterministic damped oscillator decays") {
  const DeviceParams p = DeviceParams::reference();
  const CoefficientSample c{0.0, 0.0, 0.05, false};
  PhasePoint s{3.0, 0.0};
  const double dt = 0.01;
  const int per_period = static_cast<int>(2.0 * M_PI / p.oscillator_frequency / dt);
  double last = 0.5 * s.v * s.v + 0.5 * 0.04 * s.x * s.x;
  for (int period = 0; period < 40; ++period) {
    for (int i = 0; i < per_period; ++i) s = step(s, c, p, dt, 0.0);
    const double e = 0.5 * s.v * s.v + 0.5 * 0.04 * s.x * s.x;
    CHECK(e < last);
    last = e;
  }
  CHECK(std::abs(s.x) < 3.0 * std::exp(-0.5 * 0.05 * 40 * 2.0 * M_PI / 0.2) * 1.5);
}

TEST_CASE("constant force shifts the equilibrium") {
  const DeviceParams p = DeviceParams::reference();
  const double nbar = 0.3;
  const CoefficientSample c{nbar, 0.0, 0.0, false};
  const double xs = p.force_per_charge() * nbar / (p.mass * 0.04);
  PhasePoint s{xs, 0.0};
  for (int i = 0; i < 1000; ++i) s = step(s, c, p, 0.01, 0.0);
  CHECK(s.x == doctest::Approx(xs).epsilon(1e-12));
  CHECK(std::abs(s.v) < 1e-14);

  // oscillation about x*: average over whole periods
  s = {xs + 1.0, 0.0};
  const int n = static_cast<int>(std::round(2.0 * M_PI / 0.2 / 0.01)) * 10;
  double sum = 0.0;
  for (int i = 0; i < n; ++i) {
    s = step(s, c, p, 0.01, 0.0);
    sum += s.x;
  }
  CHECK(sum / n == doctest::Approx(xs).epsilon(1e-3));
}

TEST_CASE("step is deterministic and uses the given increment") {
  const DeviceParams p = DeviceParams::reference();
  const CoefficientSample c{0.1, 0.04, 0.01, false};
  const PhasePoint a = step({1.0, 0.5}, c, p, 0.01, 0.02);
  const PhasePoint b = step({1.0, 0.5}, c, p, 0.01, 0.02);
  CHECK(a.x == b.x);
  CHECK(a.v == b.v);
  const double expected_v = 0.5 + (-0.04 * 1.0 - 0.01 * 0.5 + p.force_per_charge() * 0.1) * 0.01 + 0.2 * 0.02;
  CHECK(a.v == doctest::Approx(expected_v).epsilon(1e-14));
  CHECK(a.x == doctest::Approx(1.0 + expected_v * 0.01).epsilon(1e-14));
  const PhasePoint e = step({1.0, 0.5}, c, p, 0.01, 0.02, StepScheme::explicit_euler);
  CHECK(e.x == doctest::Approx(1.0 + 0.5 * 0.01).epsilon(1e-14));
}

TEST_CASE("frozen coefficients reproduce the Ornstein-Uhlenbeck covariance") {
  const DeviceParams p = DeviceParams::reference();
  const FrozenCoefficients frozen{0.0, 0.01, 0.05};
  const auto cov = lyapunov(p.oscillator_frequency, frozen.damping, frozen.diffusion / (p.mass * p.mass));
  const double var_x = frozen.diffusion / (2.0 * p.mass * p.mass * frozen.damping * 0.04);
  const double var_v = frozen.diffusion / (2.0 * p.mass * p.mass * frozen.damping);
  CHECK(cov[0] == doctest::Approx(var_x).epsilon(1e-12));
  CHECK(cov[2] == doctest::Approx(var_v).epsilon(1e-12));
  CHECK(std::abs(cov[1]) < 1e-14);

  const Trajectory t = run(IntegratorConfig::with_steps(10'000'000, 42), frozen, p);
  std::vector<double> x2, v2;
  for (std::size_t i = 0; i < t.positions.size(); ++i) {
    x2.push_back(t.positions[i] * t.positions[i]);
    v2.push_back(t.velocities[i] * t.velocities[i]);
  }
  const auto [mx, ex] = batched(x2, 50);
  const auto [mv, ev] = batched(v2, 50);
  CHECK(std::abs(mx - var_x) < 3.0 * ex);
  CHECK(std::abs(mv - var_v) < 3.0 * ev);

  // autocovariance follows the damped cosine
  const std::size_t lag_max = 4000;  // 400 time units at stride 10
  const auto c = position_autocorrelation(t, lag_max);
  const double lag_time = 0.1;
  const double g = frozen.damping;
  const double wt = std::sqrt(0.04 - 0.25 * g * g);
  double rms = 0.0;
  for (std::size_t k = 0; k <= lag_max; ++k) {
    const double tau = k * lag_time;
    const double model = var_x * std::exp(-0.5 * g * tau) * (std::cos(wt * tau) + 0.5 * g / wt * std::sin(wt * tau));
    rms += (c[k] - model) * (c[k] - model);
  }
  rms = std::sqrt(rms / (lag_max + 1));
  CHECK(rms < 0.05 * var_x);
}

TEST_CASE("autocovariance matches the direct sum") {
  std::mt19937_64 rng(9);
  std::normal_distribution<double> n(0.0, 1.0);
  std::vector<double> x(301);
  for (auto& v : x) v = n(rng) + 2.0;
  const auto c = autocovariance(x, 150);
  const double m = mean(x);
  for (std::size_t k = 0; k <= 150; ++k) {
    double s = 0.0;
    for (std::size_t i = 0; i + k < x.size(); ++i) s += (x[i] - m) * (x[i + k] - m);
    CHECK(c[k] == doctest::Approx(s / x.size()).epsilon(1e-10));
  }
  CHECK(c[0] == doctest::Approx(variance(x)).epsilon(1e-12));
  for (double v : c) CHECK(std::abs(v) <= c[0] * (1.0 + 1e-12));
  CHECK_THROWS_AS(autocovariance(x, 151), ConfigError);
}

TEST_CASE("identical seeds give identical trajectories") {
  const CoefficientTable table = build_table(DeviceParams::reference(6.0), TableSpec{30.0, 256}, 2);
  IntegratorConfig cfg = IntegratorConfig::with_steps(200'000, 7);
  const Trajectory a = run(cfg, table);
  const Trajectory b = run(cfg, table);
  CHECK(a.positions == b.positions);
  CHECK(a.velocities == b.velocities);
  CHECK(a.times.size() == cfg.recorded_samples());
  CHECK(a.seed == 7);
  cfg.seed = 8;
  CHECK(run(cfg, table).positions != a.positions);
}

TEST_CASE("configuration guards") {
  const DeviceParams p = DeviceParams::reference();
  IntegratorConfig c = IntegratorConfig::with_steps(1000);
  CHECK_NOTHROW(c.validate(p, 0.5));
  CHECK_THROWS_AS(c.validate(p, 20.0), ConfigError);
  c.time_step = 0.5;
  CHECK_THROWS_AS(c.validate(p, 0.0), ConfigError);
  c = IntegratorConfig::with_steps(1000);
  c.burn_in_steps = 1000;
  CHECK_THROWS_AS(c.validate(p, 0.0), ConfigError);
  c = IntegratorConfig::with_steps(1000);
  c.time_step = -0.01;
  CHECK_THROWS_AS(c.validate(p, 0.0), ConfigError);
}

TEST_CASE("non-finite state aborts with the step index") {
  const DeviceParams p = DeviceParams::reference();
  IntegratorConfig c = IntegratorConfig::with_steps(1000);
  c.initial_x = 1e300;
  c.initial_v = 1e300;
  try {
    run(c, FrozenCoefficients{0.0, 0.0, -9.0}, p);
    FAIL("expected an integration error");
  } catch (const IntegrationError& e) {
    CHECK(e.step() < 1000);
  }
}

TEST_CASE("equilibrium run") {
  const DeviceParams p = DeviceParams::reference(0.0);
  const CoefficientTable table = build_table(p, TableSpec{}, 2);
  const Trajectory t = run(IntegratorConfig::with_steps(10'000'000, 2024), table);
  CHECK(t.clamp_fraction() <= kMaxClampFraction);
  const auto [mx, ex] = batched(t.positions, 20);
  const auto [mv, ev] = batched(t.velocities, 20);
  CHECK(std::abs(mx) < 3.0 * ex);
  CHECK(std::abs(mv) < 3.0 * ev);

  // thermal blob: equal spread in both scaled quadratures
  std::vector<double> xs, ps;
  for (std::size_t i = 0; i < t.positions.size(); ++i) {
    xs.push_back(t.positions[i] / p.x0());
    ps.push_back(p.mass * t.velocities[i] / p.p0());
  }
  CHECK(variance(ps) / variance(xs) == doctest::Approx(1.0).epsilon(0.05));
}

TEST_CASE("halving the time step leaves the stationary variance unchanged") {
  // Same Brownian path at both resolutions: each coarse increment is the sum
  // of two fine ones.
  const DeviceParams p = DeviceParams::reference(0.0);
  const CoefficientTable table = build_table(p, TableSpec{}, 2);
  Xoshiro256pp gen(99);
  const double dt = 0.01;
  std::normal_distribution<double> half_step(0.0, std::sqrt(0.5 * dt));
  PhasePoint coarse, fine;
  double sc = 0.0, sf = 0.0;
  const std::uint64_t steps = 20'000'000;
  const std::uint64_t burn = 2'000'000;
  for (std::uint64_t i = 0; i < steps; ++i) {
    const double w1 = half_step(gen);
    const double w2 = half_step(gen);
    fine = step(fine, table.lookup(fine.x), p, 0.5 * dt, w1);
    fine = step(fine, table.lookup(fine.x), p, 0.5 * dt, w2);
    coarse = step(coarse, table.lookup(coarse.x), p, dt, w1 + w2);
    if (i >= burn) {
      sc += coarse.x * coarse.x;
      sf += fine.x * fine.x;
    }
  }
  CHECK(sc / sf == doctest::Approx(1.0).epsilon(0.01));
}

TEST_CASE("above threshold the motion rings up onto an annulus") {
  const DeviceParams p0 = DeviceParams::reference(0.0);
  const DeviceParams p16 = DeviceParams::reference(16.0);
  const CoefficientTable t16 = build_table(p16, TableSpec{36.0, 512}, 2);
  const Trajectory ring = run(IntegratorConfig::with_steps(10'000'000, 5), t16);
  CHECK(ring.clamp_fraction() == 0.0);
  std::vector<int> hist(400, 0);
  for (std::size_t i = 0; i < ring.positions.size(); ++i) {
    const double u = std::hypot(ring.positions[i] / p16.x0(), p16.mass * ring.velocities[i] / p16.p0());
    hist[std::min<std::size_t>(399, static_cast<std::size_t>(u / 0.1))]++;
  }
  const auto mode = std::max_element(hist.begin(), hist.end()) - hist.begin();
  CHECK(mode * 0.1 > 1.0);

  const Trajectory blob = run(IntegratorConfig::with_steps(10'000'000, 5), build_table(p0, TableSpec{}, 2));
  const std::size_t period = static_cast<std::size_t>(std::round(2.0 * M_PI / 0.2 / 0.1));
  const std::size_t lags = 20000;  // 2000 time units
  const double rate0 = envelope_rate(position_autocorrelation(blob, lags), period, 0.1);
  const double rate16 = envelope_rate(position_autocorrelation(ring, lags), period, 0.1);
  MESSAGE("envelope decay rates: V=0 " << rate0 << ", V=16 " << rate16);
  CHECK(rate16 < rate0);
  CHECK(std::abs(rate16) < rate0);
}

TEST_CASE("adiabaticity report") {
  const auto r = check_adiabaticity(DeviceParams::reference());
  CHECK(r.ratio == doctest::Approx(10.0));
  CHECK_FALSE(r.warning);

  DeviceParams fast = DeviceParams::reference();
  fast.oscillator_frequency = 1.0;
  const auto w = check_adiabaticity(fast);
  CHECK(w.ratio == doctest::Approx(2.0));
  CHECK(w.warning);
  CHECK_FALSE(w.message.empty());

  DeviceParams free = DeviceParams::reference();
  free.coupling_energy = 0.0;
  CHECK(check_adiabaticity(free).mechanical_scale == doctest::Approx(0.2));
}

TEST_CASE("xoshiro256++ reference outputs and jump") {
  auto g = Xoshiro256pp::from_state({1, 2, 3, 4});
  CHECK(g() == 41943041ULL);
  CHECK(g() == 58720359ULL);
  CHECK(g() == 3588806011781223ULL);
  auto j = Xoshiro256pp::from_state({1, 2, 3, 4});
  j.jump();
  CHECK(j.state() == std::array<std::uint64_t, 4>{10122426448480695249ULL, 8079205330032121950ULL,
                                                  7289065458748526725ULL, 9477464255293849680ULL});
  CHECK(j() == 17043750140134683703ULL);
  CHECK(derive_seed(1, 0) != derive_seed(1, 1));
  CHECK(derive_seed(1, 0) == derive_seed(1, 0));
  CHECK(derive_seed(1, 0) != derive_seed(2, 0));
}
