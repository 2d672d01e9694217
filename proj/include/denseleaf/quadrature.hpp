#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

namespace denseleaf {

struct QuadRule {
  std::vector<double> nodes;    // on [-1, 1]
  std::vector<double> weights;  // sum to 2
};

//! Gauss-Legendre nodes and weights on [-1,1], computed by Newton iteration
//! on the Legendre recurrence. Exact for polynomials of degree <= 2n-1.
inline QuadRule gauss_legendre(int n) {
  if (n < 1) throw std::invalid_argument("gauss_legendre: n < 1");
  QuadRule rule;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  const int m = (n + 1) / 2;
  for (int i = 0; i < m; ++i) {
    // Tricomi initial guess for the i-th positive root.
    double x = std::cos(3.141592653589793238462643 * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-15) break;
    }
    rule.nodes[i] = -x;
    rule.nodes[n - 1 - i] = x;
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    rule.weights[i] = w;
    rule.weights[n - 1 - i] = w;
  }
  if (n % 2 == 1) rule.nodes[n / 2] = 0.0;
  return rule;
}

//! Cached 64-point rule; the moment checks are pinned to it.
inline const QuadRule& gauss_legendre_64() {
  static const QuadRule rule = gauss_legendre(64);
  return rule;
}

template <typename F>
double integrate_gl(F&& f, double a, double b, const QuadRule& rule) {
  const double c = 0.5 * (a + b), h = 0.5 * (b - a);
  double sum = 0.0;
  for (std::size_t i = 0; i < rule.nodes.size(); ++i)
    sum += rule.weights[i] * f(c + h * rule.nodes[i]);
  return h * sum;
}

//! Composite rule over [a,b] split into m equal panels.
template <typename F>
double integrate_gl_composite(F&& f, double a, double b, int panels,
                              const QuadRule& rule) {
  if (panels < 1) throw std::invalid_argument("integrate_gl_composite: panels < 1");
  const double w = (b - a) / panels;
  double sum = 0.0;
  for (int p = 0; p < panels; ++p)
    sum += integrate_gl(f, a + p * w, a + (p + 1) * w, rule);
  return sum;
}

//! Integrate f over [a,b] with panels aligned to the given breakpoints.
//! Exact (up to rounding) when f is polynomial between consecutive
//! breakpoints and the rule order covers the degree.
template <typename F>
double integrate_piecewise(F&& f, double a, double b,
                           std::vector<double> breakpoints, const QuadRule& rule) {
  breakpoints.push_back(a);
  breakpoints.push_back(b);
  std::sort(breakpoints.begin(), breakpoints.end());
  double sum = 0.0;
  for (std::size_t i = 0; i + 1 < breakpoints.size(); ++i) {
    const double lo = std::max(a, breakpoints[i]);
    const double hi = std::min(b, breakpoints[i + 1]);
    if (hi - lo > 1e-15) sum += integrate_gl(f, lo, hi, rule);
  }
  return sum;
}

}  // namespace denseleaf
