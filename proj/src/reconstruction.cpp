#include "flywheel/reconstruction.hpp"

#include "flywheel/errors.hpp"
#include "flywheel/io.hpp"
#include "flywheel/quadrature.hpp"
#include "flywheel/special_functions.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <numbers>

namespace flywheel {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

void check_profile(const RadialProfile& profile) {
  if (profile.values.empty() || profile.values.size() != profile.centers.size()) {
    throw ConfigError("radial profile is empty or inconsistent");
  }
  if (!(profile.bin_width > 0.0)) throw ConfigError("radial profile bin width must be positive");
}

// e^{-x/2} L_k(x) for k = 0 .. out.size()-1, with running rescaling so that
// neither factor overflows for large x.
void weighted_laguerre_sequence(double x, std::vector<double>& out) {
  double prev = 0.0;
  double cur = 1.0;
  double log_scale = -0.5 * x;
  for (std::size_t k = 0; k < out.size(); ++k) {
    out[k] = cur * std::exp(log_scale);
    const double kk = static_cast<double>(k);
    const double next = ((2.0 * kk + 1.0 - x) * cur - kk * prev) / (kk + 1.0);
    prev = cur;
    cur = next;
    const double mag = std::max(std::abs(cur), std::abs(prev));
    if (mag > 1e150) {
      prev /= mag;
      cur /= mag;
      log_scale += std::log(mag);
    }
  }
}

std::vector<double> ring_edges(const RadialProfile& profile) {
  std::vector<double> edge;
  edge.reserve(profile.centers.size() + 1);
  for (double c : profile.centers) edge.push_back(std::max(0.0, c - 0.5 * profile.bin_width));
  edge.push_back(profile.centers.back() + 0.5 * profile.bin_width);
  return edge;
}

struct RadialRule {
  std::vector<double> r;
  std::vector<double> w;
};

RadialRule composite_rule(double r_max, int panels, const quad::GaussLegendre& gl) {
  RadialRule rule;
  const double h = r_max / panels;
  for (int p = 0; p < panels; ++p) {
    const double mid = (p + 0.5) * h;
    for (std::size_t i = 0; i < gl.nodes.size(); ++i) {
      rule.r.push_back(mid + 0.5 * h * gl.nodes[i]);
      rule.w.push_back(0.5 * h * gl.weights[i]);
    }
  }
  return rule;
}

std::vector<double> staged_once(const RadialProfile& profile, int n_max, const RadialRule& rule) {
  const std::vector<double> chi = characteristic_from_radial(profile, rule.r);
  std::vector<double> p(static_cast<std::size_t>(n_max) + 1, 0.0);
  std::vector<double> lag(p.size());
  for (std::size_t j = 0; j < rule.r.size(); ++j) {
    const double r = rule.r[j];
    const double common = 2.0 * rule.w[j] * r * chi[j] * std::exp(-0.5 * r * r);
    special::laguerre_sequence(r * r, lag);
    for (std::size_t n = 0; n < p.size(); ++n) p[n] += common * lag[n];
  }
  return p;
}

}  // namespace

std::vector<double> characteristic_from_radial(const RadialProfile& profile, const std::vector<double>& r) {
  check_profile(profile);
  // W is taken constant on each ring [a, b]; int_a^b u J0(2ru) du = [u J1(2ru) / 2r]_a^b,
  // so the sum telescopes onto the ring edges.
  const std::vector<double> edge = ring_edges(profile);
  const std::size_t rings = profile.values.size();
  std::vector<double> jump(rings + 1);
  for (std::size_t j = 0; j <= rings; ++j) {
    jump[j] = (j < rings ? -profile.values[j] : 0.0) + (j > 0 ? profile.values[j - 1] : 0.0);
  }
  std::vector<double> chi(r.size(), 0.0);
  for (std::size_t i = 0; i < r.size(); ++i) {
    const double ri = std::abs(r[i]);
    double s = 0.0;
    if (ri * edge.back() < 1e-9) {
      for (std::size_t j = 0; j <= rings; ++j) s += 0.5 * edge[j] * edge[j] * jump[j];
    } else {
      for (std::size_t j = 1; j <= rings; ++j) {
        if (jump[j] != 0.0) s += edge[j] * special::bessel_j1(2.0 * ri * edge[j]) * jump[j];
      }
      s /= 2.0 * ri;
    }
    chi[i] = kTwoPi * s;
  }
  return chi;
}

double characteristic_at(const RadialProfile& profile, double r) {
  return characteristic_from_radial(profile, {r}).front();
}

std::vector<double> populations_staged(const RadialProfile& profile, int n_max, const ReconstructionOptions& opt) {
  check_profile(profile);
  if (n_max < 0) throw ConfigError("n_max must be non-negative");
  const quad::GaussLegendre gl(opt.nodes_per_panel);
  int panels = opt.initial_panels;
  std::vector<double> p = staged_once(profile, n_max, composite_rule(opt.r_max, panels, gl));
  while (true) {
    panels *= 2;
    if (panels > opt.max_panels) {
      throw QuadratureError("population integrals did not converge with " + std::to_string(opt.max_panels) +
                            " panels");
    }
    std::vector<double> q = staged_once(profile, n_max, composite_rule(opt.r_max, panels, gl));
    double change = 0.0;
    for (std::size_t n = 0; n < p.size(); ++n) change = std::max(change, std::abs(q[n] - p[n]));
    p = std::move(q);
    if (change < opt.tolerance) return p;
  }
}

std::vector<double> populations_fused(const RadialProfile& profile, int n_max, const ReconstructionOptions&) {
  check_profile(profile);
  if (n_max < 0) throw ConfigError("n_max must be non-negative");
  // The r integral in closed form,
  //   2 int_0^inf dr r J0(2 r u) e^{-r^2/2} L_n(r^2) = 2 (-1)^n e^{-2u^2} L_n(4u^2),
  // and the ring integral through
  //   int_0^X e^{-t/2} L_n(t) dt = 2 (-1)^n - 2 e^{-X/2} S_n(X),
  //   S_n = L_n + 2 sum_{j=1}^n (-1)^j L_{n-j}.
  const std::vector<double> edge = ring_edges(profile);
  const std::size_t rings = profile.values.size();
  const std::size_t count = static_cast<std::size_t>(n_max) + 1;
  std::vector<double> p(count, 0.0);
  std::vector<double> lag(count);
  for (std::size_t j = 0; j <= rings; ++j) {
    const double jump = (j > 0 ? profile.values[j - 1] : 0.0) - (j < rings ? profile.values[j] : 0.0);
    if (jump == 0.0) continue;
    weighted_laguerre_sequence(4.0 * edge[j] * edge[j], lag);
    double alt = 0.0;  // sum_{j=0}^n (-1)^j w_{n-j}
    for (std::size_t n = 0; n < count; ++n) {
      alt = lag[n] - alt;
      const double e_n = 2.0 * alt - lag[n];
      p[n] += jump * (n % 2 == 0 ? -e_n : e_n);
    }
  }
  for (double& v : p) v *= std::numbers::pi;
  return p;
}

int support_bound(const RadialProfile& profile) {
  std::size_t last = 0;
  for (std::size_t k = 0; k < profile.values.size(); ++k) {
    if (profile.values[k] != 0.0) last = k;
  }
  const double edge = profile.centers[last] + 0.5 * profile.bin_width;
  return static_cast<int>(std::ceil(2.0 * edge * edge));
}

DiagonalState reconstruct_populations(const RadialProfile& profile, double omega0, const ReconstructionOptions& opt) {
  check_profile(profile);
  const int support = support_bound(profile);
  int n_max = opt.initial_n_max;
  std::vector<double> raw;
  std::vector<std::string> warnings;
  while (true) {
    raw = populations_staged(profile, n_max, opt);
    if (std::abs(raw.back()) < opt.tail_tolerance) break;
    if (n_max >= support) {
      warnings.push_back("|p_n_max| = " + io::format_double(std::abs(raw.back())) + " at n_max = " +
                         std::to_string(n_max) + ", beyond the profile support (n < " + std::to_string(support) +
                         "); taken as the noise floor");
      break;
    }
    if (n_max * 2 > opt.max_n_max) {
      throw TruncationError("p_n_max = " + io::format_double(raw.back()) + " still above " +
                            io::format_double(opt.tail_tolerance) + " at n_max = " + std::to_string(n_max));
    }
    n_max *= 2;
  }
  DiagonalState s;
  s.oscillator_frequency = omega0;
  s.n_max = n_max;
  s.raw_populations = raw;
  s.populations = raw;
  double total = 0.0;
  for (double& p : s.populations) {
    if (p < 0.0) {
      s.negativity_clipped -= p;
      p = 0.0;
    }
    total += p;
  }
  if (!(total > 0.0)) throw DomainError("reconstructed populations have no positive mass");
  for (double& p : s.populations) p /= total;
  s.renormalization_applied = true;
  s.warnings = std::move(warnings);
  if (s.negativity_clipped > opt.clip_warning) {
    s.warnings.push_back("clipped negative population mass " + io::format_double(s.negativity_clipped));
  }
  return s;
}

double mean_occupation(const DiagonalState& state) {
  double s = 0.0;
  for (std::size_t n = 0; n < state.populations.size(); ++n) s += static_cast<double>(n) * state.populations[n];
  return s;
}

DiagonalState DiagonalState::from_populations(std::vector<double> p, double omega0) {
  if (p.empty()) throw ConfigError("no populations");
  double total = 0.0;
  for (double v : p) {
    if (!(v >= 0.0)) throw ConfigError("populations must be non-negative");
    total += v;
  }
  if (std::abs(total - 1.0) > 1e-9) throw ConfigError("populations must sum to one");
  DiagonalState s;
  s.populations = p;
  s.raw_populations = std::move(p);
  s.oscillator_frequency = omega0;
  s.n_max = static_cast<int>(s.populations.size()) - 1;
  return s;
}

void DiagonalState::save(const std::filesystem::path& csv_path, double asymmetry) const {
  std::string csv = "n,p_n\n";
  for (std::size_t n = 0; n < populations.size(); ++n) {
    csv += io::csv_row({std::to_string(n), io::format_double(populations[n])});
  }
  io::write_text(csv_path, csv);
  nlohmann::json meta = {{"n_max", n_max},
                         {"clipped_mass", negativity_clipped},
                         {"asymmetry", asymmetry},
                         {"renormalized", renormalization_applied},
                         {"oscillator_frequency", oscillator_frequency}};
  std::filesystem::path side = csv_path;
  side.replace_extension(".json");
  io::write_text(side, meta.dump(2) + "\n");
}

DiagonalState DiagonalState::load(const std::filesystem::path& csv_path) {
  std::filesystem::path side = csv_path;
  side.replace_extension(".json");
  const auto meta = nlohmann::json::parse(io::read_text(side));
  const io::NumericCsv csv = io::parse_numeric_csv(io::read_text(csv_path));
  if (csv.header != std::vector<std::string>{"n", "p_n"}) throw Error("unexpected populations header");
  std::vector<double> p;
  for (const auto& row : csv.rows) p.push_back(row[1]);
  DiagonalState s = from_populations(std::move(p), meta.at("oscillator_frequency").get<double>());
  s.negativity_clipped = meta.at("clipped_mass").get<double>();
  s.renormalization_applied = meta.at("renormalized").get<bool>();
  return s;
}

}  // namespace flywheel
