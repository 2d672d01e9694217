#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <thread>
#include <vector>

#include "denseleaf/dataset.hpp"
#include "denseleaf/kernels.hpp"
#include "denseleaf/rng.hpp"

namespace denseleaf {

//! Theory bandwidth: the unique h = 2^s with
//! (log n / n)^{1/d} <= h <= 2 (log n / n)^{1/d}, so h^{-1} is a positive
//! integer. If rounding puts 2^s marginally below the lower bound, s is
//! bumped by one (the inclusive lower bound wins).
inline double theory_bandwidth(long n, int d) {
  if (n < 2) throw std::invalid_argument("theory_bandwidth: n must be >= 2");
  if (d < 1) throw std::invalid_argument("theory_bandwidth: d must be positive");
  const double upper = 2.0 * std::pow(std::log(static_cast<double>(n)) / n, 1.0 / d);
  int s = static_cast<int>(std::floor(std::log2(upper)));
  double h = std::ldexp(1.0, s);
  if (h < 0.5 * upper) h = std::ldexp(1.0, ++s);
  if (h > upper) h = std::ldexp(1.0, --s);
  return h;
}

struct BandwidthRule {
  enum class Variant { TheoryPowerOfTwo, ScaledTheory, KdeReference, Fixed };
  Variant variant = Variant::TheoryPowerOfTwo;
  double c = 1.0;     // ScaledTheory / KdeReference multiplier
  double beta = 1.0;  // KdeReference smoothness
  double h = 0.0;     // Fixed value

  static BandwidthRule theory() { return {}; }
  static BandwidthRule scaled_theory(double c) {
    return {Variant::ScaledTheory, c, 1.0, 0.0};
  }
  static BandwidthRule kde_reference(double c, double beta) {
    return {Variant::KdeReference, c, beta, 0.0};
  }
  static BandwidthRule fixed(double h) { return {Variant::Fixed, 1.0, 1.0, h}; }
};

inline double resolve_bandwidth(const BandwidthRule& rule, long n, int d) {
  double h = 0.0;
  switch (rule.variant) {
    case BandwidthRule::Variant::TheoryPowerOfTwo:
      h = theory_bandwidth(n, d);
      break;
    case BandwidthRule::Variant::ScaledTheory:
      h = rule.c * std::pow(std::log(static_cast<double>(n)) / n, 1.0 / d);
      break;
    case BandwidthRule::Variant::KdeReference:
      h = rule.c * std::pow(static_cast<double>(n), -1.0 / (2.0 * rule.beta + d));
      break;
    case BandwidthRule::Variant::Fixed:
      h = rule.h;
      break;
  }
  if (!(h > 0.0)) throw std::invalid_argument("resolve_bandwidth: nonpositive bandwidth");
  return h;
}

//! Product-kernel estimate at one query point:
//! (1/(n h^d)) sum_l prod_r K((X'_{l,r} - x_r)/h).
//! Direct sum over the training rows; no tree acceleration.
inline double kde_eval_point(const Dataset& train, const KernelSpec& k, double h,
                             const double* x) {
  const int d = train.dim;
  const double inv_h = 1.0 / h;
  double sum = 0.0;
  const std::size_t n = train.size();
  for (std::size_t l = 0; l < n; ++l) {
    const double* row = train.row(l);
    double prod = 1.0;
    for (int r = 0; r < d; ++r) {
      prod *= eval_kernel(k, (row[r] - x[r]) * inv_h);
      if (prod == 0.0) break;
    }
    sum += prod;
  }
  return sum / (static_cast<double>(n) * std::pow(h, d));
}

//! Batch evaluation; queries are row-major with train.dim columns.
//! Queries are independent, so they may be split across threads.
inline std::vector<double> kde_eval(const Dataset& train, const KernelSpec& k,
                                    double h, const std::vector<double>& queries,
                                    int threads = 1) {
  if (!(h > 0.0)) throw std::invalid_argument("kde_eval: bandwidth must be positive");
  if (queries.size() % train.dim != 0)
    throw std::invalid_argument("kde_eval: query dimension mismatch");
  const std::size_t m = queries.size() / train.dim;
  std::vector<double> out(m);
  auto work = [&](std::size_t lo, std::size_t hi) {
    for (std::size_t i = lo; i < hi; ++i)
      out[i] = kde_eval_point(train, k, h, queries.data() + i * train.dim);
  };
  if (threads <= 1 || m < 256) {
    work(0, m);
  } else {
    std::vector<std::thread> pool;
    const std::size_t chunk = (m + threads - 1) / threads;
    for (int t = 0; t < threads; ++t) {
      const std::size_t lo = std::min(m, t * chunk);
      const std::size_t hi = std::min(m, lo + chunk);
      if (lo < hi) pool.emplace_back(work, lo, hi);
    }
    for (auto& th : pool) th.join();
  }
  return out;
}

//! Pseudo-responses Y_i = f_KDE(X_i): the KDE is built on kernel_data and
//! evaluated at the regression points.
inline std::vector<double> generate_responses(const Dataset& kernel_data,
                                              const Dataset& regression_data,
                                              const KernelSpec& k, double h,
                                              int threads = 1) {
  if (kernel_data.dim != regression_data.dim)
    throw std::invalid_argument("generate_responses: dimension mismatch");
  return kde_eval(kernel_data, k, h, regression_data.points, threads);
}

//! Bandwidth shape used during cross-validation calibration: the candidate
//! bandwidth is c * shape(m) with m the dataset size.
struct BandwidthShape {
  enum class Kind { Theory, Reference };
  Kind kind = Kind::Theory;
  double beta = 1.0;

  double operator()(double c, long m, int d) const {
    if (kind == Kind::Theory)
      return c * std::pow(std::log(static_cast<double>(m)) / m, 1.0 / d);
    return c * std::pow(static_cast<double>(m), -1.0 / (2.0 * beta + d));
  }
  static BandwidthShape theory() { return {}; }
  static BandwidthShape reference(double beta) { return {Kind::Reference, beta}; }
};

namespace detail {

//! Least-squares CV score for one candidate bandwidth on one dataset:
//! fold-average of [grid-quadrature of f_{-fold}^2  -  2 * held-out mean].
//! The quadrature grid is a per-axis uniform trapezoid rule on [-h, 1+h]
//! with `grid_nodes` nodes; the tensor sum is evaluated in pair-factorized
//! form, which is algebraically identical to summing over the full grid.
inline double cv_score_for_bandwidth(const Dataset& data, const KernelSpec& k,
                                     double h,
                                     const std::vector<std::size_t>& order,
                                     const std::vector<std::size_t>& fold_start,
                                     int grid_nodes) {
  const int d = data.dim;
  const std::size_t m = data.size();
  const double inv_h = 1.0 / h;
  const int G = grid_nodes;
  const double lo = -h, hi = 1.0 + h;
  const double step = (hi - lo) / (G - 1);

  // Per-axis kernel table scaled by sqrt of the trapezoid weight.
  std::vector<double> pair(m * m, 1.0);   // prod_r D_r
  std::vector<double> axis(m * G);
  for (int r = 0; r < d; ++r) {
    for (std::size_t l = 0; l < m; ++l) {
      const double xl = data.row(l)[r];
      for (int g = 0; g < G; ++g) {
        const double w = (g == 0 || g == G - 1) ? 0.5 * step : step;
        axis[l * G + g] = std::sqrt(w) * eval_kernel(k, (xl - (lo + g * step)) * inv_h);
      }
    }
    for (std::size_t a = 0; a < m; ++a) {
      const double* ra = axis.data() + a * G;
      for (std::size_t b = a; b < m; ++b) {
        const double* rb = axis.data() + b * G;
        double dot = 0.0;
        for (int g = 0; g < G; ++g) dot += ra[g] * rb[g];
        pair[a * m + b] *= dot;
      }
    }
  }
  for (std::size_t a = 0; a < m; ++a)
    for (std::size_t b = 0; b < a; ++b) pair[a * m + b] = pair[b * m + a];

  // Cross kernel values at the data points themselves.
  std::vector<double> cross(m * m);
  for (std::size_t a = 0; a < m; ++a) {
    for (std::size_t b = a; b < m; ++b) {
      double prod = 1.0;
      for (int r = 0; r < d; ++r)
        prod *= eval_kernel(k, (data.row(a)[r] - data.row(b)[r]) * inv_h);
      cross[a * m + b] = prod;
      cross[b * m + a] = prod;
    }
  }

  std::vector<double> pair_rowsum(m, 0.0), cross_colsum(m, 0.0);
  double pair_total = 0.0;
  for (std::size_t a = 0; a < m; ++a) {
    double s = 0.0, cs = 0.0;
    for (std::size_t b = 0; b < m; ++b) {
      s += pair[a * m + b];
      cs += cross[b * m + a];
    }
    pair_rowsum[a] = s;
    cross_colsum[a] = cs;
    pair_total += s;
  }

  const double hd = std::pow(h, d);
  const std::size_t folds = fold_start.size() - 1;
  double score_sum = 0.0;
  for (std::size_t f = 0; f < folds; ++f) {
    const std::size_t begin = fold_start[f], end = fold_start[f + 1];
    const std::size_t fold_n = end - begin;
    const std::size_t train_n = m - fold_n;
    double fold_rows = 0.0, fold_block = 0.0;
    for (std::size_t i = begin; i < end; ++i) {
      const std::size_t a = order[i];
      fold_rows += pair_rowsum[a];
      for (std::size_t j = begin; j < end; ++j) fold_block += pair[a * m + order[j]];
    }
    const double quad = (pair_total - 2.0 * fold_rows + fold_block) /
                        (static_cast<double>(train_n) * train_n * hd * hd);
    double held_out = 0.0;
    for (std::size_t i = begin; i < end; ++i) {
      const std::size_t a = order[i];
      double s = cross_colsum[a];
      for (std::size_t j = begin; j < end; ++j) s -= cross[order[j] * m + a];
      held_out += s / (static_cast<double>(train_n) * hd);
    }
    held_out /= static_cast<double>(fold_n);
    score_sum += quad - 2.0 * held_out;
  }
  return score_sum / static_cast<double>(folds);
}

}  // namespace detail

//! Calibrates the bandwidth constant by least-squares cross-validation on
//! each dataset and returns the average of the per-dataset optima. Fold
//! assignment is contiguous blocks after a seeded shuffle; grid ties break
//! toward the smaller constant (the method undersmooths by design).
inline double cv_calibrate(const std::vector<Dataset>& datasets, const KernelSpec& k,
                           double grid_lo, double grid_hi, double grid_step,
                           int folds, BandwidthShape shape = BandwidthShape::theory(),
                           std::uint64_t shuffle_seed = 0x5eedf01d, int threads = 1,
                           int grid_nodes = 65) {
  if (datasets.empty()) throw std::invalid_argument("cv_calibrate: no datasets");
  if (!(grid_lo < grid_hi) && grid_lo != grid_hi)
    throw std::invalid_argument("cv_calibrate: grid_lo must be <= grid_hi");
  if (!(grid_step > 0.0)) throw std::invalid_argument("cv_calibrate: grid_step must be positive");
  if (folds < 2) throw std::invalid_argument("cv_calibrate: folds must be >= 2");

  std::vector<double> grid;
  for (double c = grid_lo; c <= grid_hi + 1e-12; c += grid_step) grid.push_back(c);

  double optima_sum = 0.0;
  for (std::size_t di = 0; di < datasets.size(); ++di) {
    const Dataset& data = datasets[di];
    const std::size_t m = data.size();
    if (m < static_cast<std::size_t>(folds))
      throw std::invalid_argument("cv_calibrate: fold count exceeds dataset size");

    // Fold shuffle depends on the dataset alone, so identical datasets get
    // identical fold splits regardless of their position in the list.
    std::vector<std::size_t> order(m);
    std::iota(order.begin(), order.end(), 0);
    Rng rng(seed_mix(seed_mix(shuffle_seed, data.seed), static_cast<std::uint64_t>(m)));
    for (std::size_t i = m; i > 1; --i)
      std::swap(order[i - 1], order[rng.next_u64() % i]);
    std::vector<std::size_t> fold_start(folds + 1);
    for (int f = 0; f <= folds; ++f) fold_start[f] = (m * static_cast<std::size_t>(f)) / folds;

    std::vector<double> scores(grid.size());
    auto work = [&](std::size_t lo_i, std::size_t hi_i) {
      for (std::size_t gi = lo_i; gi < hi_i; ++gi) {
        const double h = shape(grid[gi], static_cast<long>(m), data.dim);
        scores[gi] = detail::cv_score_for_bandwidth(data, k, h, order, fold_start, grid_nodes);
      }
    };
    if (threads <= 1 || grid.size() < 4) {
      work(0, grid.size());
    } else {
      std::vector<std::thread> pool;
      const std::size_t chunk = (grid.size() + threads - 1) / threads;
      for (int t = 0; t < threads; ++t) {
        const std::size_t lo_i = std::min(grid.size(), t * chunk);
        const std::size_t hi_i = std::min(grid.size(), lo_i + chunk);
        if (lo_i < hi_i) pool.emplace_back(work, lo_i, hi_i);
      }
      for (auto& th : pool) th.join();
    }

    std::size_t best = 0;
    for (std::size_t gi = 1; gi < grid.size(); ++gi)
      if (scores[gi] < scores[best]) best = gi;
    optima_sum += grid[best];
  }
  return optima_sum / static_cast<double>(datasets.size());
}

}  // namespace denseleaf
