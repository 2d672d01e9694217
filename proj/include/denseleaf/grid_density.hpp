#pragma once

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <ostream>
#include <stdexcept>
#include <vector>

#include "denseleaf/rng.hpp"

namespace denseleaf {

//! 1D density stored as nonnegative values on a uniform grid of
//! [0, support_hi], evaluated by linear interpolation, with the trapezoid
//! cumulative alongside for inverse-CDF sampling.
struct GridDensity1D {
  double support_hi = 1.0;
  std::vector<double> values;
  std::vector<double> cdf;

  std::size_t cells() const { return values.size() - 1; }
  double step() const { return support_hi / static_cast<double>(cells()); }

  double pdf(double x) const {
    if (x < 0.0 || x > support_hi) return 0.0;
    const double t = x / step();
    std::size_t i = static_cast<std::size_t>(t);
    if (i >= cells()) i = cells() - 1;
    const double frac = t - static_cast<double>(i);
    return values[i] + (values[i + 1] - values[i]) * frac;
  }

  double cdf_at(double x) const {
    if (x <= 0.0) return 0.0;
    if (x >= support_hi) return 1.0;
    const double dx = step();
    const double t = x / dx;
    std::size_t i = static_cast<std::size_t>(t);
    if (i >= cells()) i = cells() - 1;
    const double s = x - static_cast<double>(i) * dx;
    const double slope = (values[i + 1] - values[i]) / dx;
    return cdf[i] + values[i] * s + 0.5 * slope * s * s;
  }

  //! Inverse CDF; the within-cell quadratic is solved in the stable
  //! Muller form.
  double quantile(double u) const {
    if (u <= 0.0) return 0.0;
    if (u >= 1.0) return support_hi;
    std::size_t lo = 0, hi = cdf.size() - 1;
    while (hi - lo > 1) {
      const std::size_t mid = (lo + hi) / 2;
      if (cdf[mid] <= u) lo = mid; else hi = mid;
    }
    const double dx = step();
    const double a = 0.5 * (values[lo + 1] - values[lo]) / dx;
    const double b = values[lo];
    const double c = cdf[lo] - u;  // a s^2 + b s + c = 0, s in [0, dx]
    double s;
    if (std::abs(a) < 1e-14 * std::max(1.0, b)) {
      s = (b > 0.0) ? -c / b : 0.0;
    } else {
      const double disc = std::max(0.0, b * b - 4.0 * a * c);
      const double denom = b + std::sqrt(disc);
      s = (denom > 0.0) ? -2.0 * c / denom : 0.0;
    }
    if (s < 0.0) s = 0.0;
    if (s > dx) s = dx;
    return static_cast<double>(lo) * dx + s;
  }

  //! Scales to unit trapezoid integral and rebuilds the cumulative.
  void normalize() {
    if (values.size() < 2) throw std::invalid_argument("GridDensity1D: needs >= 2 knots");
    const double dx = step();
    double mass = 0.0;
    for (std::size_t i = 0; i + 1 < values.size(); ++i)
      mass += 0.5 * dx * (values[i] + values[i + 1]);
    if (!(mass > 0.0)) throw std::invalid_argument("GridDensity1D: zero mass");
    for (double& v : values) v /= mass;
    cdf.assign(values.size(), 0.0);
    for (std::size_t i = 0; i + 1 < values.size(); ++i)
      cdf[i + 1] = cdf[i] + 0.5 * dx * (values[i] + values[i + 1]);
    const double total = cdf.back();
    for (double& v : cdf) v /= total;
    cdf.back() = 1.0;
  }

  double trapezoid_mass() const {
    const double dx = step();
    double mass = 0.0;
    for (std::size_t i = 0; i + 1 < values.size(); ++i)
      mass += 0.5 * dx * (values[i] + values[i + 1]);
    return mass;
  }
};

//! Knot values as CSV, for inspection.
inline void write_grid_csv(const GridDensity1D& g, std::ostream& out) {
  out << "x,value\n";
  char buf[64];
  const double dx = g.step();
  for (std::size_t i = 0; i < g.values.size(); ++i) {
    std::snprintf(buf, sizeof(buf), "%.17g,%.17g\n", static_cast<double>(i) * dx,
                  g.values[i]);
    out << buf;
  }
}

//! rho(x) = max(0, (4x/3)(1 - 4x/3)); vanishes outside (0, 3/4).
inline double rho_bump(double x) {
  const double t = 4.0 * x / 3.0;
  return std::max(0.0, t * (1.0 - t));
}

//! Exponential of a standard Brownian path on [0,1], normalized. With
//! with_rho the path is multiplied by rho and restricted to [0, 3/4]
//! (the grid knot at 3/4 is exact because the resolution is a multiple
//! of 4), giving a rough density that vanishes at 0.
inline GridDensity1D make_expbm_density(std::uint64_t seed, int resolution,
                                        bool with_rho) {
  if (resolution < 64) throw std::invalid_argument("make_expbm_density: resolution < 64");
  if (resolution % 4 != 0)
    throw std::invalid_argument("make_expbm_density: resolution must be a multiple of 4");
  Rng rng(seed);
  const double sd = std::sqrt(1.0 / resolution);
  std::vector<double> path(resolution + 1);
  path[0] = 0.0;
  for (int i = 1; i <= resolution; ++i) path[i] = path[i - 1] + sd * rng.gaussian();
  GridDensity1D g;
  if (with_rho) {
    const int knots = 3 * resolution / 4;
    g.support_hi = 0.75;
    g.values.resize(knots + 1);
    for (int i = 0; i <= knots; ++i)
      g.values[i] = std::exp(path[i]) * rho_bump(static_cast<double>(i) / resolution);
  } else {
    g.support_hi = 1.0;
    g.values.resize(resolution + 1);
    for (int i = 0; i <= resolution; ++i) g.values[i] = std::exp(path[i]);
  }
  g.normalize();
  return g;
}

inline double linear_hj_value(int d, double x) {
  return 1.0 - (2.0 * x - 1.0) / static_cast<double>(d);
}

//! h_j(x) = 1 - (2x-1)/d on [0,1]. Linear, so the grid representation is
//! exact under linear interpolation.
inline GridDensity1D make_linear_hj(int d, int resolution = 4096) {
  if (d < 1) throw std::invalid_argument("make_linear_hj: d must be positive");
  GridDensity1D g;
  g.support_hi = 1.0;
  g.values.resize(resolution + 1);
  for (int i = 0; i <= resolution; ++i)
    g.values[i] = linear_hj_value(d, static_cast<double>(i) / resolution);
  g.normalize();
  return g;
}

//! Normalized rho bump on [0, 3/4]: the smooth shifting base (quadratic,
//! vanishes at 0, support [0, 3/4]).
inline GridDensity1D make_rho_density(int resolution = 4096) {
  if (resolution % 4 != 0)
    throw std::invalid_argument("make_rho_density: resolution must be a multiple of 4");
  const int knots = 3 * resolution / 4;
  GridDensity1D g;
  g.support_hi = 0.75;
  g.values.resize(knots + 1);
  for (int i = 0; i <= knots; ++i)
    g.values[i] = rho_bump(static_cast<double>(i) / resolution);
  g.normalize();
  return g;
}

//! Re-grids a [0, 3/4] density onto the [0,1] grid with the same spacing,
//! padding zeros above 3/4. Used when a shifting-support density serves as
//! a mixing base, whose stored support is [0,1] by convention.
inline GridDensity1D embed_to_unit(const GridDensity1D& g) {
  if (g.support_hi == 1.0) return g;
  GridDensity1D out;
  out.support_hi = 1.0;
  const std::size_t knots = (g.values.size() - 1) * 4 / 3;
  out.values.assign(knots + 1, 0.0);
  for (std::size_t i = 0; i < g.values.size(); ++i) out.values[i] = g.values[i];
  out.normalize();
  return out;
}

}  // namespace denseleaf
