#include "flywheel/electronic.hpp"

#include "flywheel/errors.hpp"
#include "flywheel/io.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

namespace flywheel::electronic {

namespace {

constexpr double kInvTwoPi = 0.5 / std::numbers::pi;

// Logistic 1/(1+e^t) and its complement, both without overflow.
double logistic_upper(double t) {
  if (t > 0.0) {
    const double e = std::exp(-t);
    return e / (1.0 + e);
  }
  return 1.0 / (1.0 + std::exp(t));
}

// f(1-f) = e^{-|t|} / (1 + e^{-|t|})^2
double logistic_slope(double t) {
  const double e = std::exp(-std::abs(t));
  return e / ((1.0 + e) * (1.0 + e));
}

double kappa_prime(double omega, const LeadSpec& lead) {
  const double d = omega - lead.center_frequency;
  const double den = d * d + lead.bandwidth * lead.bandwidth;
  return -2.0 * lead.coupling * lead.bandwidth * lead.bandwidth * d / (den * den);
}

std::complex<double> self_energy_prime(double omega, const LeadSpec& lead) {
  const std::complex<double> z(omega - lead.center_frequency, lead.bandwidth);
  return -0.5 * lead.coupling * lead.bandwidth / (z * z);
}

// Everything that depends on the frozen position only.
struct Frozen {
  const DeviceParams& p;
  double level;
  double force;

  Frozen(double x, const DeviceParams& params)
      : p(params), level(params.level_at(x)), force(params.force_per_charge()) {}

  std::complex<double> inverse_green(double w) const {
    return w - level - self_energy(w, p.left) - self_energy(w, p.right);
  }

  double spectral(double w) const { return 1.0 / std::norm(inverse_green(w)); }

  double filled(double w, const LeadSpec& lead) const {
    return spectral_density(w, lead) * fermi(w, lead.chemical_potential, lead.inverse_temperature);
  }

  double empty(double w, const LeadSpec& lead) const {
    const double t = lead.inverse_temperature * (w - lead.chemical_potential);
    return spectral_density(w, lead) * logistic_upper(-t);
  }

  // d/dw [k (1 - f)] for one lead.
  double empty_prime(double w, const LeadSpec& lead) const {
    const double t = lead.inverse_temperature * (w - lead.chemical_potential);
    return kappa_prime(w, lead) * logistic_upper(-t) +
           spectral_density(w, lead) * lead.inverse_temperature * logistic_slope(t);
  }

  double tail_scale() const {
    return std::max({p.left.bandwidth, p.right.bandwidth, 1.0 / p.left.inverse_temperature,
                     1.0 / p.right.inverse_temperature});
  }

  std::vector<double> breakpoints(double shift = 0.0) const {
    std::vector<double> b = {level,
                             p.left.center_frequency,
                             p.right.center_frequency,
                             p.left.chemical_potential,
                             p.right.chemical_potential};
    if (shift != 0.0) {
      const std::size_t n = b.size();
      for (std::size_t i = 0; i < n; ++i) b.push_back(b[i] - shift);
    }
    return b;
  }
};

std::string at(double x) { return " at x = " + io::format_double(x); }

}  // namespace

double fermi(double omega, double mu, double beta) { return logistic_upper(beta * (omega - mu)); }

double spectral_density(double omega, const LeadSpec& lead) {
  const double d = omega - lead.center_frequency;
  const double d2 = lead.bandwidth * lead.bandwidth;
  return lead.coupling * d2 / (d * d + d2);
}

std::complex<double> self_energy(double omega, const LeadSpec& lead) {
  // (Gamma delta / 2) / (w - w_a + i delta)
  const std::complex<double> z(omega - lead.center_frequency, lead.bandwidth);
  return 0.5 * lead.coupling * lead.bandwidth / z;
}

std::complex<double> green_function(double omega, double x, const DeviceParams& params) {
  return 1.0 / Frozen(x, params).inverse_green(omega);
}

double spectral_function(double omega, double x, const DeviceParams& params) {
  return Frozen(x, params).spectral(omega);
}

double spectral_sum_rule(double x, const DeviceParams& params, const Settings& settings) {
  const Frozen fz(x, params);
  auto f = [&](double w) -> quad::Vec<1> {
    return {fz.spectral(w) * (spectral_density(w, params.left) + spectral_density(w, params.right)) *
            kInvTwoPi};
  };
  return quad::integrate_real_line<1>(f, fz.breakpoints(), fz.tail_scale(), settings.quadrature).value[0];
}

double excess_occupation(double x, const DeviceParams& params, const Settings& settings) {
  const Frozen fz(x, params);
  auto f = [&](double w) -> quad::Vec<2> {
    const double a = fz.spectral(w) * kInvTwoPi;
    return {a * (fz.filled(w, params.left) + fz.filled(w, params.right)),
            a * (spectral_density(w, params.left) + spectral_density(w, params.right))};
  };
  const auto r = quad::integrate_real_line<2>(f, fz.breakpoints(), fz.tail_scale(), settings.quadrature);
  const double deviation = std::abs(r.value[1] - 1.0);
  if (!(deviation <= settings.sum_rule_tolerance)) {
    throw QuadratureError("spectral sum rule off by " + io::format_double(deviation) + at(x));
  }
  return r.value[0] - 0.5;
}

double noise_spectrum(double x, double omega, const DeviceParams& params, const Settings& settings) {
  const Frozen fz(x, params);
  auto f = [&](double w) -> quad::Vec<1> {
    const double w2 = w + omega;
    const double kf = fz.filled(w, params.left) + fz.filled(w, params.right);
    const double kh = fz.empty(w2, params.left) + fz.empty(w2, params.right);
    return {fz.spectral(w) * fz.spectral(w2) * kf * kh * kInvTwoPi};
  };
  const auto r = quad::integrate_real_line<1>(f, fz.breakpoints(omega), fz.tail_scale(), settings.quadrature);
  return fz.force * fz.force * r.value[0];
}

namespace {

// Zero-frequency noise as an explicit sum over lead pairs.
double diffusion_integral(const Frozen& fz, const Settings& settings) {
  const LeadSpec* leads[2] = {&fz.p.left, &fz.p.right};
  auto f = [&](double w) -> quad::Vec<1> {
    const double a = fz.spectral(w);
    double sum = 0.0;
    for (const LeadSpec* in : leads) {
      for (const LeadSpec* out : leads) sum += fz.filled(w, *in) * fz.empty(w, *out);
    }
    return {a * a * sum * kInvTwoPi};
  };
  return quad::integrate_real_line<1>(f, fz.breakpoints(), fz.tail_scale(), settings.quadrature).value[0];
}

double damping_integral(const Frozen& fz, double diffusion_scale, const Settings& settings) {
  const DeviceParams& p = fz.p;
  auto f = [&](double w) -> quad::Vec<1> {
    const std::complex<double> g = fz.inverse_green(w);
    const std::complex<double> gp = 1.0 - self_energy_prime(w, p.left) - self_energy_prime(w, p.right);
    const double a = 1.0 / std::norm(g);
    const double a_prime = -2.0 * std::real(std::conj(g) * gp) * a * a;
    const double kf = fz.filled(w, p.left) + fz.filled(w, p.right);
    const double kh = fz.empty(w, p.left) + fz.empty(w, p.right);
    const double kh_prime = fz.empty_prime(w, p.left) + fz.empty_prime(w, p.right);
    return {a * kf * (kh_prime * a + kh * a_prime) * kInvTwoPi};
  };
  // The damping integral passes through zero as a function of x, so its
  // tolerance is anchored to the diffusion integral instead of itself.
  quad::Options opt = settings.quadrature;
  opt.abs_tol = std::max(opt.abs_tol, 1e-12 * diffusion_scale);
  return quad::integrate_real_line<1>(f, fz.breakpoints(), fz.tail_scale(), opt).value[0];
}

double checked_damping(double x, const DeviceParams& params, const Settings& settings, double d) {
  const double analytic = damping_analytic(x, params, settings);
  const double fd = damping_finite_difference(x, params, settings);
  const double tol = settings.damping_rel_tolerance * std::abs(analytic) +
                     settings.damping_noise_floor * d / params.mass;
  if (!(std::abs(analytic - fd) <= tol)) {
    throw InconsistencyError("damping: analytic " + io::format_double(analytic) + " vs finite difference " +
                             io::format_double(fd) + at(x));
  }
  return analytic;
}

}  // namespace

double diffusion(double x, const DeviceParams& params, const Settings& settings) {
  const Frozen fz(x, params);
  return fz.force * fz.force * diffusion_integral(fz, settings);
}

double damping_analytic(double x, const DeviceParams& params, const Settings& settings) {
  const Frozen fz(x, params);
  const double scale = diffusion_integral(fz, settings);
  return fz.force * fz.force * damping_integral(fz, scale, settings) / params.mass;
}

double damping_finite_difference(double x, const DeviceParams& params, const Settings& settings) {
  const double h = settings.fd_step;
  const double up = noise_spectrum(x, h, params, settings);
  const double down = noise_spectrum(x, -h, params, settings);
  return (up - down) / (2.0 * h * params.mass);
}

double damping(double x, const DeviceParams& params, const Settings& settings) {
  return checked_damping(x, params, settings, diffusion(x, params, settings));
}

LocalCoefficients local_coefficients(double x, const DeviceParams& params, const Settings& settings) {
  LocalCoefficients c;
  c.occupation = excess_occupation(x, params, settings);
  c.diffusion = diffusion(x, params, settings);
  c.damping = checked_damping(x, params, settings, c.diffusion);
  return c;
}

}  // namespace flywheel::electronic
