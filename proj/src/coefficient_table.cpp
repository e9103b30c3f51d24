#include "flywheel/coefficient_table.hpp"

#include "flywheel/errors.hpp"
#include "flywheel/io.hpp"
#include "flywheel/serialize.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <thread>

namespace flywheel {

namespace {

// Second derivatives of the not-a-knot cubic spline through uniformly spaced y.
std::vector<double> spline_moments(const std::vector<double>& y, double h) {
  const std::size_t n = y.size();
  std::vector<double> rhs(n, 0.0);
  for (std::size_t i = 1; i + 1 < n; ++i) rhs[i] = 6.0 * (y[i + 1] - 2.0 * y[i] + y[i - 1]) / (h * h);
  std::vector<double> m(n, 0.0);
  // Not-a-knot closes the first and last interior rows to 6 M = rhs.
  m[1] = rhs[1] / 6.0;
  m[n - 2] = rhs[n - 2] / 6.0;
  // Thomas sweep for rows 2 .. n-3 of M[i-1] + 4 M[i] + M[i+1] = rhs[i].
  const std::size_t lo = 2;
  const std::size_t hi = n - 3;
  std::vector<double> c(n, 0.0);
  std::vector<double> d(n, 0.0);
  for (std::size_t i = lo; i <= hi; ++i) {
    double r = rhs[i];
    if (i == lo) r -= m[1];
    if (i == hi) r -= m[n - 2];
    const double denom = 4.0 - (i == lo ? 0.0 : c[i - 1]);
    c[i] = 1.0 / denom;
    d[i] = (r - (i == lo ? 0.0 : d[i - 1])) / denom;
  }
  for (std::size_t i = hi + 1; i-- > lo;) m[i] = d[i] - (i == hi ? 0.0 : c[i] * m[i + 1]);
  m[0] = 2.0 * m[1] - m[2];
  m[n - 1] = 2.0 * m[n - 2] - m[n - 3];
  return m;
}

double spline_eval(const std::vector<double>& y, const std::vector<double>& m, std::size_t i, double a, double h) {
  const double b = 1.0 - a;
  return a * y[i] + b * y[i + 1] + ((a * a * a - a) * m[i] + (b * b * b - b) * m[i + 1]) * h * h / 6.0;
}

}  // namespace

CoefficientTable::CoefficientTable(DeviceParams params, std::vector<double> positions,
                                   std::vector<double> occupation, std::vector<double> diffusion,
                                   std::vector<double> damping)
    : params_(params),
      fingerprint_(params.fingerprint()),
      x_(std::move(positions)),
      n_(std::move(occupation)),
      d_(std::move(diffusion)),
      g_(std::move(damping)) {
  const std::size_t n = x_.size();
  if (n < 16) throw ConfigError("coefficient table needs at least 16 nodes");
  if (n_.size() != n || d_.size() != n || g_.size() != n) throw ConfigError("coefficient arrays differ in length");
  h_ = (x_.back() - x_.front()) / static_cast<double>(n - 1);
  if (!(h_ > 0.0)) throw ConfigError("coefficient grid must be increasing");
  for (std::size_t i = 0; i < n; ++i) {
    if (i > 0 && !(x_[i] > x_[i - 1])) throw ConfigError("coefficient grid must be strictly increasing");
    if (std::abs(x_[i] - (x_.front() + h_ * static_cast<double>(i))) > 1e-9 * h_) {
      throw ConfigError("coefficient grid must be uniform");
    }
    if (!(d_[i] >= 0.0)) throw ConfigError("negative diffusion at x = " + io::format_double(x_[i]));
    if (!std::isfinite(n_[i]) || !std::isfinite(g_[i])) throw ConfigError("non-finite coefficient");
  }
  mn_ = spline_moments(n_, h_);
  md_ = spline_moments(d_, h_);
  mg_ = spline_moments(g_, h_);
}

CoefficientSample CoefficientTable::lookup(double x) const {
  const std::size_t last = x_.size() - 1;
  if (!(x >= x_.front())) return {n_.front(), d_.front(), g_.front(), true};
  if (x >= x_.back()) return {n_.back(), d_.back(), g_.back(), x > x_.back()};
  auto i = static_cast<std::size_t>((x - x_.front()) / h_);
  if (i >= last) i = last - 1;
  if (x < x_[i] && i > 0) --i;
  if (x >= x_[i + 1] && i + 1 < last) ++i;
  if (x == x_[i]) return {n_[i], d_[i], g_[i], false};
  const double a = (x_[i + 1] - x) / h_;
  return {spline_eval(n_, mn_, i, a, h_), spline_eval(d_, md_, i, a, h_), spline_eval(g_, mg_, i, a, h_), false};
}

std::filesystem::path CoefficientTable::sidecar_path(const std::filesystem::path& csv_path) {
  std::filesystem::path p = csv_path;
  p.replace_extension(".json");
  return p;
}

void CoefficientTable::save(const std::filesystem::path& csv_path) const {
  std::string csv = "x,n_excess,D,gamma\n";
  for (std::size_t i = 0; i < x_.size(); ++i) {
    csv += io::csv_row({io::format_double(x_[i]), io::format_double(n_[i]), io::format_double(d_[i]),
                        io::format_double(g_[i])});
  }
  io::write_text(csv_path, csv);
  nlohmann::json side = {{"params", params_},
                         {"fingerprint", fingerprint_},
                         {"n_points", x_.size()},
                         {"x_min", x_.front()},
                         {"x_max", x_.back()},
                         {"x0", params_.x0()},
                         {"interpolation_order", interpolation_order()}};
  io::write_text(sidecar_path(csv_path), side.dump(2) + "\n");
}

CoefficientTable CoefficientTable::load(const std::filesystem::path& csv_path) {
  const nlohmann::json side = nlohmann::json::parse(io::read_text(sidecar_path(csv_path)));
  const auto params = side.at("params").get<DeviceParams>();
  if (params.fingerprint() != side.at("fingerprint").get<std::string>()) {
    throw Error("table sidecar fingerprint does not match its parameters: " + csv_path.string());
  }
  const io::NumericCsv csv = io::parse_numeric_csv(io::read_text(csv_path));
  if (csv.header != std::vector<std::string>{"x", "n_excess", "D", "gamma"}) {
    throw Error("unexpected coefficient table header in " + csv_path.string());
  }
  std::vector<double> x, n, d, g;
  for (const auto& row : csv.rows) {
    x.push_back(row[0]);
    n.push_back(row[1]);
    d.push_back(row[2]);
    g.push_back(row[3]);
  }
  return CoefficientTable(params, std::move(x), std::move(n), std::move(d), std::move(g));
}

CoefficientTable build_table(const DeviceParams& params, double x_min, double x_max, int n_points, int workers,
                             const electronic::Settings& settings) {
  params.validate();
  if (n_points < 16) throw ConfigError("n_points must be at least 16");
  if (!(x_max > x_min)) throw ConfigError("table range is empty");
  const auto n = static_cast<std::size_t>(n_points);
  std::vector<double> x(n), occ(n), dif(n), dam(n);
  const double h = (x_max - x_min) / static_cast<double>(n - 1);
  for (std::size_t i = 0; i < n; ++i) x[i] = x_min + h * static_cast<double>(i);
  x.back() = x_max;

  std::vector<std::exception_ptr> failures(n);
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      try {
        const auto c = electronic::local_coefficients(x[i], params, settings);
        occ[i] = c.occupation;
        dif[i] = c.diffusion;
        dam[i] = c.damping;
      } catch (...) {
        failures[i] = std::current_exception();
      }
    }
  };
  const int n_threads = std::clamp(workers, 1, n_points);
  std::vector<std::thread> pool;
  for (int t = 1; t < n_threads; ++t) pool.emplace_back(work);
  work();
  for (auto& t : pool) t.join();
  for (const auto& f : failures) {
    if (f) std::rethrow_exception(f);
  }
  return CoefficientTable(params, std::move(x), std::move(occ), std::move(dif), std::move(dam));
}

CoefficientTable build_table(const DeviceParams& params, const TableSpec& spec, int workers,
                             const electronic::Settings& settings) {
  const double half = spec.extent * params.x0();
  return build_table(params, -half, half, spec.n_points, workers, settings);
}

std::optional<std::pair<double, double>> find_negative_damping_interval(const CoefficientTable& table) {
  constexpr int kSub = 16;
  const auto& x = table.positions();
  const double step = (x.back() - x.front()) / (static_cast<double>(x.size() - 1) * kSub);
  auto gamma = [&](double at) { return table.lookup(at).damping; };
  // Sign change inside [a, b] refined by bisection.
  auto root = [&](double a, double b) {
    const bool a_neg = gamma(a) < 0.0;
    for (int it = 0; it < 80 && b - a > 1e-13 * step; ++it) {
      const double mid = 0.5 * (a + b);
      if ((gamma(mid) < 0.0) == a_neg) {
        a = mid;
      } else {
        b = mid;
      }
    }
    return 0.5 * (a + b);
  };

  std::optional<std::pair<double, double>> best;
  const std::size_t samples = (x.size() - 1) * kSub;
  double start = 0.0;
  bool open = false;
  double prev_x = x.front();
  bool prev_neg = false;
  for (std::size_t k = 0; k <= samples; ++k) {
    const double at = (k == samples) ? x.back() : x.front() + step * static_cast<double>(k);
    const bool neg = gamma(at) < 0.0;
    if (k == 0) {
      start = at;
    } else if (neg && !prev_neg) {
      start = root(prev_x, at);
    } else if (!neg && prev_neg) {
      const std::pair<double, double> iv{start, root(prev_x, at)};
      if (!best || iv.second - iv.first > best->second - best->first) best = iv;
    }
    open = neg;
    prev_neg = neg;
    prev_x = at;
  }
  if (open) {
    const std::pair<double, double> iv{start, x.back()};
    if (!best || iv.second - iv.first > best->second - best->first) best = iv;
  }
  return best;
}

double find_threshold_voltage(const DeviceParams& base, double v_lo, double v_hi, const TableSpec& spec,
                              double tolerance, int workers) {
  auto lasing = [&](double v) {
    return find_negative_damping_interval(build_table(base.with_voltage(v), spec, workers)).has_value();
  };
  if (lasing(v_lo)) throw Error("negative damping already present at the lower voltage bracket");
  if (!lasing(v_hi)) throw Error("no negative damping at the upper voltage bracket");
  while (v_hi - v_lo > tolerance) {
    const double mid = 0.5 * (v_lo + v_hi);
    if (lasing(mid)) {
      v_hi = mid;
    } else {
      v_lo = mid;
    }
  }
  return 0.5 * (v_lo + v_hi);
}

}  // namespace flywheel
