#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

#include "denseleaf/quadrature.hpp"

namespace denseleaf {

//! Compactly supported kernel of order s on [-1,1], stored as polynomial
//! coefficients in ascending degree. K(u) = 0 is implied for |u| > 1.
//!
//! Order s means unit integral plus vanishing moments int u^l K(u) du = 0
//! for l = 1..s.
struct KernelSpec {
  int order = 0;
  std::vector<double> coeffs;
  double sup_norm = 0.0;
};

//! Horner evaluation of the stored polynomial; exactly 0 outside [-1,1].
inline double eval_kernel(const KernelSpec& k, double u) {
  if (u < -1.0 || u > 1.0) return 0.0;
  double v = 0.0;
  for (std::size_t i = k.coeffs.size(); i-- > 0;) v = v * u + k.coeffs[i];
  return v;
}

namespace detail {

//! Coefficients (ascending) of the Legendre polynomial P_m on [-1,1].
inline std::vector<double> legendre_coeffs(int m) {
  std::vector<double> p0{1.0};
  if (m == 0) return p0;
  std::vector<double> p1{0.0, 1.0};
  for (int k = 2; k <= m; ++k) {
    std::vector<double> p2(k + 1, 0.0);
    for (int i = 0; i <= k - 1; ++i)
      p2[i + 1] += (2.0 * k - 1.0) / k * p1[i];
    for (int i = 0; i <= k - 2; ++i)
      p2[i] -= (k - 1.0) / k * p0[i];
    p0 = std::move(p1);
    p1 = std::move(p2);
  }
  return p1;
}

inline double poly_eval(const std::vector<double>& c, double u) {
  double v = 0.0;
  for (std::size_t i = c.size(); i-- > 0;) v = v * u + c[i];
  return v;
}

//! Max of |poly| on [-1,1]: coarse scan, then bisection on the derivative
//! sign changes to pin interior extrema.
inline double poly_sup_norm(const std::vector<double>& c) {
  std::vector<double> dc;
  for (std::size_t i = 1; i < c.size(); ++i) dc.push_back(c[i] * static_cast<double>(i));
  const int grid = 4096;
  double best = std::max(std::abs(poly_eval(c, -1.0)), std::abs(poly_eval(c, 1.0)));
  double prev_x = -1.0;
  double prev_d = dc.empty() ? 0.0 : poly_eval(dc, prev_x);
  for (int i = 1; i <= grid; ++i) {
    const double x = -1.0 + 2.0 * i / grid;
    best = std::max(best, std::abs(poly_eval(c, x)));
    if (dc.empty()) continue;
    const double d = poly_eval(dc, x);
    if ((prev_d < 0.0) != (d < 0.0)) {
      double lo = prev_x, hi = x;
      double dlo = prev_d;
      for (int it = 0; it < 80; ++it) {
        const double mid = 0.5 * (lo + hi);
        const double dm = poly_eval(dc, mid);
        if ((dlo < 0.0) != (dm < 0.0)) {
          hi = mid;
        } else {
          lo = mid;
          dlo = dm;
        }
      }
      best = std::max(best, std::abs(poly_eval(c, 0.5 * (lo + hi))));
    }
    prev_x = x;
    prev_d = d;
  }
  return best;
}

}  // namespace detail

//! Builds the order-s kernel from the orthonormal Legendre expansion
//! K(u) = sum_{m=0..s} phi_m(0) phi_m(u); odd terms vanish at 0, so orders
//! 0 and 1 both yield the box kernel.
inline KernelSpec build_order_kernel(int s) {
  if (s < 0) throw std::invalid_argument("build_order_kernel: negative order");
  std::vector<double> coeffs(static_cast<std::size_t>(s) + 1, 0.0);
  for (int m = 0; m <= s; m += 2) {
    const std::vector<double> pm = detail::legendre_coeffs(m);
    const double scale = (2.0 * m + 1.0) / 2.0 * detail::poly_eval(pm, 0.0);
    for (std::size_t i = 0; i < pm.size(); ++i) coeffs[i] += scale * pm[i];
  }
  while (coeffs.size() > 1 && coeffs.back() == 0.0) coeffs.pop_back();
  KernelSpec k;
  k.order = s;
  k.coeffs = std::move(coeffs);
  k.sup_norm = detail::poly_sup_norm(k.coeffs);
  return k;
}

struct MomentReport {
  double unit_integral = 0.0;        // int K
  std::vector<double> moments;       // int u^l K, l = 1..s
  double abs_moment_s1 = 0.0;        // int |u|^{s+1} |K|, finiteness witness
  bool pass = false;
};

//! Quadrature check of the order-s conditions. A failing kernel yields
//! pass = false, never a throw.
inline MomentReport verify_moments(const KernelSpec& k, double tol_unit,
                                   double tol_moment) {
  if (tol_unit <= 0.0 || tol_moment <= 0.0)
    throw std::invalid_argument("verify_moments: tolerances must be positive");
  const QuadRule& rule = gauss_legendre_64();
  MomentReport rep;
  rep.unit_integral = integrate_gl([&](double u) { return eval_kernel(k, u); }, -1.0, 1.0, rule);
  rep.pass = std::abs(rep.unit_integral - 1.0) <= tol_unit;
  for (int l = 1; l <= k.order; ++l) {
    const double m = integrate_gl(
        [&](double u) { return std::pow(u, l) * eval_kernel(k, u); }, -1.0, 1.0, rule);
    rep.moments.push_back(m);
    if (std::abs(m) > tol_moment) rep.pass = false;
  }
  // |u|^{s+1}|K| is not polynomial; split at 0 and use a composite rule.
  // Reported as a witness only, no threshold attached.
  rep.abs_moment_s1 = integrate_gl_composite(
      [&](double u) {
        return std::pow(std::abs(u), k.order + 1) * std::abs(eval_kernel(k, u));
      },
      -1.0, 1.0, 16, rule);
  return rep;
}

}  // namespace denseleaf
