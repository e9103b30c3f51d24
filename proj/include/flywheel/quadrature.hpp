#pragma once

// Globally adaptive 7/15-point Gauss-Kronrod quadrature for vector-valued
// integrands, on finite intervals and on the whole real line.

#include "flywheel/errors.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace flywheel::quad {

struct Options {
  double abs_tol = 1e-15;
  double rel_tol = 1e-11;
  int max_intervals = 4000;
};

template <std::size_t N>
using Vec = std::array<double, N>;

template <std::size_t N>
struct Result {
  Vec<N> value{};
  Vec<N> error{};
  int evaluations = 0;
  int intervals = 0;
};

namespace detail {

// Kronrod abscissae (positive half, descending) and weights; Gauss weights
// for the embedded 7-point rule sit at the odd Kronrod nodes.
inline constexpr std::array<double, 8> kXgk = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
inline constexpr std::array<double, 8> kWgk = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
inline constexpr std::array<double, 4> kWg = {
    0.129484966168869693270611432679082, 0.279705391489276667901467768523938,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

template <std::size_t N>
struct Segment {
  double a = 0.0;
  double b = 0.0;
  Vec<N> value{};
  Vec<N> error{};
};

template <std::size_t N, class F>
Segment<N> gk15(F& f, double a, double b) {
  const double center = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  Vec<N> kronrod{};
  Vec<N> gauss{};
  const Vec<N> fc = f(center);
  for (std::size_t c = 0; c < N; ++c) {
    kronrod[c] = kWgk[7] * fc[c];
    gauss[c] = kWg[3] * fc[c];
  }
  for (std::size_t j = 0; j < 7; ++j) {
    const double dx = half * kXgk[j];
    const Vec<N> f1 = f(center - dx);
    const Vec<N> f2 = f(center + dx);
    for (std::size_t c = 0; c < N; ++c) {
      const double sum = f1[c] + f2[c];
      kronrod[c] += kWgk[j] * sum;
      if (j % 2 == 1) gauss[c] += kWg[j / 2] * sum;
    }
  }
  Segment<N> s;
  s.a = a;
  s.b = b;
  for (std::size_t c = 0; c < N; ++c) {
    s.value[c] = kronrod[c] * half;
    s.error[c] = std::abs((kronrod[c] - gauss[c]) * half);
  }
  return s;
}

}  // namespace detail

/// Integrates f over the union of the given finite intervals [a_i, b_i],
/// refining globally until every component satisfies
/// error <= max(abs_tol, rel_tol * |value|).
template <std::size_t N, class F>
Result<N> integrate_pieces(F&& f, std::span<const std::pair<double, double>> pieces,
                           const Options& opt = {}) {
  using Seg = detail::Segment<N>;
  std::vector<Seg> segs;
  segs.reserve(static_cast<std::size_t>(opt.max_intervals) + pieces.size());
  Result<N> res;
  for (const auto& [a, b] : pieces) {
    if (b > a) segs.push_back(detail::gk15<N>(f, a, b));
  }
  res.evaluations = static_cast<int>(segs.size()) * 15;

  auto totals = [&](Vec<N>& value, Vec<N>& error) {
    value.fill(0.0);
    error.fill(0.0);
    for (const auto& s : segs) {
      for (std::size_t c = 0; c < N; ++c) {
        value[c] += s.value[c];
        error[c] += s.error[c];
      }
    }
  };

  Vec<N> value{};
  Vec<N> error{};
  totals(value, error);
  while (true) {
    Vec<N> tol{};
    bool done = true;
    for (std::size_t c = 0; c < N; ++c) {
      tol[c] = std::max(opt.abs_tol, opt.rel_tol * std::abs(value[c]));
      if (error[c] > tol[c]) done = false;
    }
    if (done) break;
    if (static_cast<int>(segs.size()) >= opt.max_intervals) {
      throw QuadratureError("adaptive quadrature did not converge within " +
                            std::to_string(opt.max_intervals) + " intervals");
    }
    // Bisect the segment contributing most to the normalised error.
    std::size_t worst = 0;
    double worst_score = -1.0;
    for (std::size_t i = 0; i < segs.size(); ++i) {
      double score = 0.0;
      for (std::size_t c = 0; c < N; ++c) score += segs[i].error[c] / tol[c];
      if (score > worst_score) {
        worst_score = score;
        worst = i;
      }
    }
    const Seg parent = segs[worst];
    const double mid = 0.5 * (parent.a + parent.b);
    if (!(mid > parent.a && mid < parent.b)) {
      throw QuadratureError("adaptive quadrature reached interval resolution limit");
    }
    Seg left = detail::gk15<N>(f, parent.a, mid);
    Seg right = detail::gk15<N>(f, mid, parent.b);
    res.evaluations += 30;
    for (std::size_t c = 0; c < N; ++c) {
      value[c] += left.value[c] + right.value[c] - parent.value[c];
      error[c] += left.error[c] + right.error[c] - parent.error[c];
    }
    segs[worst] = left;
    segs.push_back(right);
    // Re-sum occasionally to stop drift in the running totals.
    if (segs.size() % 64 == 0) totals(value, error);
  }
  totals(res.value, res.error);
  res.intervals = static_cast<int>(segs.size());
  for (std::size_t c = 0; c < N; ++c) {
    if (!std::isfinite(res.value[c])) throw QuadratureError("non-finite integrand or result");
  }
  return res;
}

template <std::size_t N, class F>
Result<N> integrate(F&& f, double a, double b, const Options& opt = {}) {
  const std::array<std::pair<double, double>, 1> piece{{{a, b}}};
  return integrate_pieces<N>(f, piece, opt);
}

/// Integral over the real line. The breakpoints (any order, duplicates allowed)
/// split the line into finite pieces plus two tails; each tail is mapped to a
/// finite interval by w = b +/- scale * t / (1 - t).
template <std::size_t N, class F>
Result<N> integrate_real_line(F&& f, std::vector<double> breakpoints, double scale = 1.0,
                              const Options& opt = {}) {
  std::sort(breakpoints.begin(), breakpoints.end());
  breakpoints.erase(std::unique(breakpoints.begin(), breakpoints.end()), breakpoints.end());
  if (breakpoints.empty()) breakpoints.push_back(0.0);
  const double lo = breakpoints.front();
  const double hi = breakpoints.back();

  // Variable u in [-1, 0) is the left tail, [0, span] the finite part,
  // (span, span + 1] the right tail.
  const double span = hi - lo;
  auto mapped = [&](double u) -> Vec<N> {
    if (u < 0.0) {
      const double t = -u;
      const double s = 1.0 - t;
      const Vec<N> v = f(lo - scale * t / s);
      Vec<N> out{};
      const double jac = scale / (s * s);
      for (std::size_t c = 0; c < N; ++c) out[c] = v[c] * jac;
      return out;
    }
    if (u > span) {
      const double t = u - span;
      const double s = 1.0 - t;
      const Vec<N> v = f(hi + scale * t / s);
      Vec<N> out{};
      const double jac = scale / (s * s);
      for (std::size_t c = 0; c < N; ++c) out[c] = v[c] * jac;
      return out;
    }
    return f(lo + u);
  };
  std::vector<std::pair<double, double>> pieces;
  pieces.emplace_back(-1.0, 0.0);
  for (std::size_t i = 0; i + 1 < breakpoints.size(); ++i) {
    pieces.emplace_back(breakpoints[i] - lo, breakpoints[i + 1] - lo);
  }
  pieces.emplace_back(span, span + 1.0);
  return integrate_pieces<N>(mapped, pieces, opt);
}

/// Nodes and weights of the n-point Gauss-Legendre rule on [-1, 1].
struct GaussLegendre {
  std::vector<double> nodes;
  std::vector<double> weights;
  explicit GaussLegendre(int n);
};

}  // namespace flywheel::quad
