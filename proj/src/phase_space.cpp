#include "flywheel/phase_space.hpp"

#include "flywheel/errors.hpp"
#include "flywheel/io.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <numbers>

namespace flywheel {

GridSpec GridSpec::with_extent(double extent) {
  GridSpec g;
  g.extent = extent;
  g.bins = 2 * static_cast<int>(std::ceil(extent * 100.0 / 12.0 - 1e-9)) + 1;
  return g;
}

void GridSpec::validate() const {
  if (!(extent > 0.0) || !std::isfinite(extent)) throw ConfigError("grid extent must be positive");
  if (bins < 1 || bins % 2 == 0) throw ConfigError("grid bin count must be odd and positive");
}

void SampleMoments::merge(const SampleMoments& o) {
  count += o.count;
  sum_u += o.sum_u;
  sum_w += o.sum_w;
  sum_uu += o.sum_uu;
  sum_ww += o.sum_ww;
  sum_r4 += o.sum_r4;
}

WignerAccumulator::WignerAccumulator(GridSpec spec) : spec_(spec), inv_width_(0.0) {
  spec_.validate();
  inv_width_ = 1.0 / spec_.width();
  counts_.assign(static_cast<std::size_t>(spec_.bins) * static_cast<std::size_t>(spec_.bins), 0);
}

void WignerAccumulator::merge(const WignerAccumulator& other) {
  if (other.spec_.bins != spec_.bins || other.spec_.extent != spec_.extent) {
    throw ConfigError("cannot merge histograms on different grids");
  }
  for (std::size_t i = 0; i < counts_.size(); ++i) counts_[i] += other.counts_[i];
  outside_ += other.outside_;
  moments_.merge(other.moments_);
}

WignerGrid WignerAccumulator::finalize(double max_outside) const {
  if (total() == 0) throw CoverageError("no phase-space samples");
  if (outside_fraction() > max_outside) {
    throw CoverageError(std::to_string(outside_) + " of " + std::to_string(total()) +
                        " samples fall outside the +/-" + io::format_double(spec_.extent) + " grid");
  }
  WignerGrid g;
  g.spec = spec_;
  g.n_samples = total() - outside_;
  g.n_outside = outside_;
  g.moments = moments_;
  const double w = spec_.width();
  const double scale = 1.0 / (static_cast<double>(g.n_samples) * w * w);
  g.density.resize(counts_.size());
  for (std::size_t i = 0; i < counts_.size(); ++i) g.density[i] = static_cast<double>(counts_[i]) * scale;
  return g;
}

namespace {

template <class F>
double grid_expectation(const WignerGrid& g, F&& f) {
  const double cell = g.width() * g.width();
  double s = 0.0;
  for (int ix = 0; ix < g.spec.bins; ++ix) {
    for (int iw = 0; iw < g.spec.bins; ++iw) {
      const double d = g.at(ix, iw);
      if (d != 0.0) s += d * cell * f(g.center(ix), g.center(iw));
    }
  }
  return s;
}

}  // namespace

double WignerGrid::total_mass() const {
  return grid_expectation(*this, [](double, double) { return 1.0; });
}
double WignerGrid::mean_u() const {
  return grid_expectation(*this, [](double u, double) { return u; });
}
double WignerGrid::mean_w() const {
  return grid_expectation(*this, [](double, double w) { return w; });
}
double WignerGrid::mean_uu() const {
  return grid_expectation(*this, [](double u, double) { return u * u; });
}
double WignerGrid::mean_ww() const {
  return grid_expectation(*this, [](double, double w) { return w * w; });
}

void WignerGrid::save(const std::filesystem::path& csv_path) const {
  std::string csv = "x,p,W\n";
  csv.reserve(density.size() * 48);
  for (int ix = 0; ix < spec.bins; ++ix) {
    const std::string xs = io::format_double(center(ix));
    for (int iw = 0; iw < spec.bins; ++iw) {
      csv += io::csv_row({xs, io::format_double(center(iw)), io::format_double(at(ix, iw))});
    }
  }
  io::write_text(csv_path, csv);
  nlohmann::json meta = {{"extent", spec.extent},     {"bins", spec.bins},
                         {"bin_width", width()},      {"n_samples", n_samples},
                         {"n_outside", n_outside},    {"units", "x/x0, p/p0"},
                         {"sample_nbar", moments.nbar()}};
  std::filesystem::path side = csv_path;
  side.replace_extension(".json");
  io::write_text(side, meta.dump(2) + "\n");
}

double RadialProfile::norm() const {
  double s = 0.0;
  for (std::size_t k = 0; k < values.size(); ++k) s += centers[k] * values[k];
  return 2.0 * std::numbers::pi * s * bin_width;
}

double RadialProfile::mode() const {
  if (values.empty()) return 0.0;
  const auto k = static_cast<std::size_t>(std::max_element(values.begin(), values.end()) - values.begin());
  return centers[k];
}

void RadialProfile::save(const std::filesystem::path& csv_path) const {
  std::string csv = "u,W\n";
  for (std::size_t k = 0; k < values.size(); ++k) {
    csv += io::csv_row({io::format_double(centers[k]), io::format_double(values[k])});
  }
  io::write_text(csv_path, csv);
}

RadialProfile radial_profile(const WignerGrid& grid, double bin_width) {
  constexpr int kSub = 8;
  constexpr int kSectors = 8;
  if (!(bin_width > 0.0)) throw ConfigError("radial bin width must be positive");
  RadialProfile p;
  p.bin_width = bin_width;
  const auto n = static_cast<std::size_t>(std::ceil(grid.spec.extent * std::numbers::sqrt2 / bin_width));
  std::vector<double> ring(n, 0.0);
  std::vector<double> area(n, 0.0);
  std::vector<double> sector(kSectors, 0.0);
  const double w = grid.width();
  const double sub = w / kSub;
  for (int ix = 0; ix < grid.spec.bins; ++ix) {
    for (int iw = 0; iw < grid.spec.bins; ++iw) {
      const double d = grid.at(ix, iw);
      const double m = d * w * w / (kSub * kSub);
      const double u0 = grid.edge(ix);
      const double w0 = grid.edge(iw);
      for (int a = 0; a < kSub; ++a) {
        const double u = u0 + (a + 0.5) * sub;
        for (int b = 0; b < kSub; ++b) {
          const double v = w0 + (b + 0.5) * sub;
          const auto k = std::min(n - 1, static_cast<std::size_t>(std::hypot(u, v) / bin_width));
          area[k] += sub * sub;
          if (m == 0.0) continue;
          ring[k] += m;
          const double turn = (std::atan2(v, u) + std::numbers::pi) / (2.0 * std::numbers::pi);
          sector[static_cast<std::size_t>(std::min(kSectors - 1, static_cast<int>(turn * kSectors)))] += m;
        }
      }
    }
  }
  for (std::size_t k = 0; k < n; ++k) {
    p.centers.push_back((static_cast<double>(k) + 0.5) * bin_width);
    p.values.push_back(area[k] > 0.0 ? ring[k] / area[k] : 0.0);
  }
  double mean = 0.0;
  for (double s : sector) mean += s / kSectors;
  for (double s : sector) p.asymmetry = std::max(p.asymmetry, std::abs(s - mean) / mean);
  if (p.asymmetry > kMaxAsymmetry) {
    p.warnings.push_back("radial symmetry violated: asymmetry " + io::format_double(p.asymmetry));
  }
  return p;
}

}  // namespace flywheel
