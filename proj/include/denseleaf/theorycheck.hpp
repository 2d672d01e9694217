#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "denseleaf/densities.hpp"
#include "denseleaf/kde.hpp"
#include "denseleaf/kernels.hpp"
#include "denseleaf/quadrature.hpp"
#include "denseleaf/rng.hpp"

namespace denseleaf {

//! Outcome of one quantitative check; pass means lhs <= rhs + slack.
//! Inconclusive marks degenerate Monte-Carlo instances (zero empirical
//! right-hand side against a positive left-hand side) that neither confirm
//! nor refute the bound.
struct CheckReport {
  std::string name;
  double lhs = 0.0;
  double rhs = 0.0;
  double slack = 0.0;
  long trials = 0;
  bool pass = false;
  bool inconclusive = false;

  nlohmann::json to_json() const {
    return {{"name", name},   {"lhs", lhs},     {"rhs", rhs},
            {"slack", slack}, {"trials", trials}, {"pass", pass},
            {"inconclusive", inconclusive}};
  }
};

//! Named bounded statistic applied pointwise and summed over a sample.
struct BoundedStatistic {
  std::string name;
  std::function<double(const double*)> fn;

  //! 1{x in [0, 1/2]^d}.
  static BoundedStatistic half_box_indicator(int d) {
    return {"indicator[0,1/2]^" + std::to_string(d), [d](const double* x) {
              for (int r = 0; r < d; ++r)
                if (x[r] > 0.5) return 0.0;
              return 1.0;
            }};
  }
};

//! Threshold set A = {s : lo <= s <= hi} for the summed statistic.
struct ThresholdSet {
  double lo = 0.0;
  double hi = 0.0;
  bool contains(double s) const { return s >= lo && s <= hi; }
  static ThresholdSet at_least(double v) { return {v, 1e300}; }
  static ThresholdSet everything() { return {-1e300, 1e300}; }
};

//! Empirical check of the Poissonization inequality
//! P(sum_{i<=n} h(X_i) in A) <= sqrt(2 e pi n) P(sum_{i<=M} h(X_i) in A),
//! M ~ Poisson(n). Null truth means uniform draws on [0,1]^d.
inline CheckReport check_poissonization(long n, const BoundedStatistic& statistic,
                                        const ThresholdSet& set, long trials,
                                        std::uint64_t seed, int dim = 1,
                                        const DensityModel* truth = nullptr) {
  if (trials < 10000) throw std::invalid_argument("check_poissonization: trials must be >= 1e4");
  if (truth != nullptr) dim = truth->dim();
  Rng rng(seed);
  std::vector<double> x(dim);
  auto draw_point = [&]() {
    if (truth != nullptr) {
      truth->sample_row(x.data(), rng);
    } else {
      for (double& v : x) v = rng.uniform();
    }
  };
  long hits_fixed = 0, hits_poisson = 0;
  for (long t = 0; t < trials; ++t) {
    double sum = 0.0;
    for (long i = 0; i < n; ++i) {
      draw_point();
      sum += statistic.fn(x.data());
    }
    hits_fixed += set.contains(sum);
  }
  for (long t = 0; t < trials; ++t) {
    const long m = rng.poisson(static_cast<double>(n));
    double sum = 0.0;
    for (long i = 0; i < m; ++i) {
      draw_point();
      sum += statistic.fn(x.data());
    }
    hits_poisson += set.contains(sum);
  }
  const double p_fixed = static_cast<double>(hits_fixed) / static_cast<double>(trials);
  const double p_poisson = static_cast<double>(hits_poisson) / static_cast<double>(trials);
  const double factor = std::sqrt(2.0 * std::exp(1.0) * 3.141592653589793 * n);
  auto se = [&](double p) { return std::sqrt(p * (1.0 - p) / static_cast<double>(trials)); };

  CheckReport rep;
  rep.name = "poissonization(n=" + std::to_string(n) + "," + statistic.name + ")";
  rep.lhs = p_fixed;
  rep.rhs = factor * p_poisson;
  rep.slack = 3.0 * (se(p_fixed) + factor * se(p_poisson));
  rep.trials = trials;
  rep.pass = rep.lhs <= rep.rhs + rep.slack;
  rep.inconclusive = (hits_poisson == 0 && hits_fixed > 0);
  return rep;
}

//! Paper convention: the largest integer strictly below x.
inline int floor_strict(double x) {
  const int f = static_cast<int>(std::floor(x));
  return (static_cast<double>(f) == x) ? f - 1 : f;
}

namespace detail {

//! E[eps | X = x] = int (1/h^d) prod K((u-x)/h) f0(u) du - f0(x) by
//! composite tensor Gauss-Legendre over the clipped kernel window.
inline double conditional_bias_at(const DensityModel& truth, const KernelSpec& k,
                                  double h, const double* x, int panels = 16,
                                  int gl_points = 8) {
  const int d = truth.dim();
  const QuadRule rule = gauss_legendre(gl_points);
  std::vector<std::vector<double>> nodes(d), weights(d);
  for (int r = 0; r < d; ++r) {
    const double lo = std::max(0.0, x[r] - h);
    const double hi = std::min(1.0, x[r] + h);
    if (hi <= lo) return -truth.eval(x);  // window fully outside the support
    const double w = (hi - lo) / panels;
    for (int p = 0; p < panels; ++p)
      for (int q = 0; q < gl_points; ++q) {
        nodes[r].push_back(lo + (p + 0.5 * (1.0 + rule.nodes[q])) * w);
        weights[r].push_back(0.5 * w * rule.weights[q]);
      }
  }
  const std::size_t G = nodes[0].size();
  const double inv_h = 1.0 / h;
  double integral = 0.0;
  std::vector<double> u(d);
  std::vector<std::size_t> idx(d, 0);
  while (true) {
    double wgt = 1.0, kern = 1.0;
    for (int r = 0; r < d; ++r) {
      u[r] = nodes[r][idx[r]];
      wgt *= weights[r][idx[r]];
      kern *= eval_kernel(k, (u[r] - x[r]) * inv_h);
    }
    integral += wgt * kern * truth.eval(u.data());
    int r = d - 1;
    while (r >= 0 && ++idx[r] == G) idx[r--] = 0;
    if (r < 0) break;
  }
  return integral / std::pow(h, d) - truth.eval(x);
}

}  // namespace detail

//! |E[eps_i | X_i]| <= h^beta d^beta ||K||_inf^d F at every probe point.
//! beta and F are declared by the truth's constructor, not estimated.
inline CheckReport check_bias_bound(const DensityModel& truth, double beta, double F,
                                    const KernelSpec& k, double h,
                                    const std::vector<std::vector<double>>& probes) {
  if (!(h > 0.0 && h < 1.0)) throw std::invalid_argument("check_bias_bound: h must be in (0,1)");
  if (k.order != floor_strict(beta))
    throw std::invalid_argument("check_bias_bound: kernel order must equal floor(beta)");
  const int d = truth.dim();
  if (d > 3) throw std::invalid_argument("check_bias_bound: quadrature restricted to d <= 3");
  double worst = 0.0;
  for (const auto& p : probes) {
    if (static_cast<int>(p.size()) != d)
      throw std::invalid_argument("check_bias_bound: probe dimension mismatch");
    worst = std::max(worst, std::abs(detail::conditional_bias_at(truth, k, h, p.data())));
  }
  CheckReport rep;
  rep.name = "bias_bound(h=" + std::to_string(h) + ")";
  rep.lhs = worst;
  rep.rhs = std::pow(h, beta) * std::pow(static_cast<double>(d), beta) *
            std::pow(k.sup_norm, d) * F;
  rep.slack = 1e-12;
  rep.trials = static_cast<long>(probes.size());
  rep.pass = rep.lhs <= rep.rhs + rep.slack;
  return rep;
}

//! E[|eps - E[eps|X]|^2] <= 65 F^2 2^{2d} ||K||_inf^{2d}, Monte Carlo over
//! fresh (X, kernel-sample) pairs with the conditional mean by quadrature.
inline CheckReport check_noise_variance(const DensityModel& truth, double F,
                                        const KernelSpec& k, double h, long trials,
                                        std::uint64_t seed, long kernel_n = 64) {
  if (trials < 10000) throw std::invalid_argument("check_noise_variance: trials must be >= 1e4");
  const int d = truth.dim();
  if (d > 3) throw std::invalid_argument("check_noise_variance: quadrature restricted to d <= 3");
  Rng rng(seed);
  Dataset kernel_data;
  kernel_data.dim = d;
  kernel_data.points.resize(static_cast<std::size_t>(kernel_n) * d);
  std::vector<double> x(d);
  double sum = 0.0, sum2 = 0.0;
  for (long t = 0; t < trials; ++t) {
    truth.sample_row(x.data(), rng);
    for (long i = 0; i < kernel_n; ++i)
      truth.sample_row(kernel_data.points.data() + i * d, rng);
    const double eps = kde_eval_point(kernel_data, k, h, x.data()) - truth.eval(x.data());
    const double centered = eps - detail::conditional_bias_at(truth, k, h, x.data(), 8, 6);
    const double sq = centered * centered;
    sum += sq;
    sum2 += sq * sq;
  }
  const double mean = sum / static_cast<double>(trials);
  const double var = std::max(0.0, sum2 / static_cast<double>(trials) - mean * mean);

  CheckReport rep;
  rep.name = "noise_variance(h=" + std::to_string(h) + ")";
  rep.lhs = mean;
  rep.rhs = 65.0 * F * F * std::pow(2.0, 2 * d) * std::pow(k.sup_norm, 2 * d);
  rep.slack = 3.0 * std::sqrt(var / static_cast<double>(trials));
  rep.trials = trials;
  rep.pass = rep.lhs <= rep.rhs + rep.slack;
  return rep;
}

//! Product of linear h_j marginals with its declared Holder data; the
//! standard truth for the bias and variance checks.
struct DeclaredTruth {
  DensityModel model;
  double beta = 1.0;
  double F = 1.0;
};

inline DeclaredTruth make_linear_product_truth(int d, int resolution = 2048) {
  ProductDensity prod;
  double sup = 1.0, lip = 0.0;
  for (int r = 0; r < d; ++r) {
    prod.marginals.push_back(make_linear_hj(d, resolution));
    sup *= 1.0 + 1.0 / d;
  }
  lip = 2.0 * sup;  // per-axis slope bound: (2/d) * prod of other factors <= 2 sup
  DeclaredTruth t;
  t.model.model = std::move(prod);
  t.model.tag = "linear_product_d" + std::to_string(d);
  t.beta = 1.0;
  t.F = std::max(1.0, sup + static_cast<double>(d) * lip);
  return t;
}

}  // namespace denseleaf
