// Test-only quadrature oracle: integrates a product-kernel KDE over
// [-h, 1+h]^d with Gauss-Legendre panels aligned to the kernel support
// breakpoints {X_lr +- h}. Between breakpoints the estimate is polynomial
// per axis, so the rule is exact up to rounding. Independent of the
// library's quadrature module by construction (local GL nodes, explicit
// breakpoint handling).
#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "denseleaf/dataset.hpp"
#include "denseleaf/kde.hpp"
#include "denseleaf/kernels.hpp"

namespace oracle {

// 3-point Gauss-Legendre on [-1,1]: exact through degree 5.
inline const double kGlNodes[3] = {-0.7745966692414834, 0.0, 0.7745966692414834};
inline const double kGlWeights[3] = {5.0 / 9.0, 8.0 / 9.0, 5.0 / 9.0};

inline std::vector<double> axis_breakpoints(const denseleaf::Dataset& train, int axis,
                                            double h) {
  std::vector<double> cuts{-h, 1.0 + h};
  for (std::size_t i = 0; i < train.size(); ++i) {
    const double x = train.row(i)[axis];
    cuts.push_back(x - h);
    cuts.push_back(x + h);
  }
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end(),
                         [](double a, double b) { return std::abs(a - b) < 1e-13; }),
             cuts.end());
  while (!cuts.empty() && cuts.front() < -h - 1e-13) cuts.erase(cuts.begin());
  while (!cuts.empty() && cuts.back() > 1.0 + h + 1e-13) cuts.pop_back();
  return cuts;
}

struct AxisNodes {
  std::vector<double> x, w;
};

inline AxisNodes axis_nodes(const denseleaf::Dataset& train, int axis, double h) {
  const std::vector<double> cuts = axis_breakpoints(train, axis, h);
  AxisNodes out;
  for (std::size_t p = 0; p + 1 < cuts.size(); ++p) {
    const double c = 0.5 * (cuts[p] + cuts[p + 1]);
    const double half = 0.5 * (cuts[p + 1] - cuts[p]);
    for (int q = 0; q < 3; ++q) {
      out.x.push_back(c + half * kGlNodes[q]);
      out.w.push_back(half * kGlWeights[q]);
    }
  }
  return out;
}

inline double kde_mass_1d(const denseleaf::Dataset& train, const denseleaf::KernelSpec& k,
                          double h) {
  const AxisNodes nodes = axis_nodes(train, 0, h);
  double total = 0.0;
  for (std::size_t i = 0; i < nodes.x.size(); ++i)
    total += nodes.w[i] * denseleaf::kde_eval_point(train, k, h, &nodes.x[i]);
  return total;
}

inline double kde_mass_2d(const denseleaf::Dataset& train, const denseleaf::KernelSpec& k,
                          double h) {
  const AxisNodes ax = axis_nodes(train, 0, h);
  const AxisNodes ay = axis_nodes(train, 1, h);
  const std::size_t n = train.size();
  const double inv_h = 1.0 / h;
  // Sort training points along axis 0 so each x-node only visits rows with
  // a nonzero first kernel factor.
  std::vector<std::size_t> idx(n);
  for (std::size_t i = 0; i < n; ++i) idx[i] = i;
  std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
    return train.row(a)[0] < train.row(b)[0];
  });
  std::vector<double> xs(n), ys(n);
  for (std::size_t i = 0; i < n; ++i) {
    xs[i] = train.row(idx[i])[0];
    ys[i] = train.row(idx[i])[1];
  }
  const double norm = 1.0 / (static_cast<double>(n) * h * h);
  double total = 0.0;
  std::vector<double> k1(n);
  for (std::size_t i = 0; i < ax.x.size(); ++i) {
    const double a = ax.x[i];
    const auto lo = std::lower_bound(xs.begin(), xs.end(), a - h) - xs.begin();
    const auto hi = std::upper_bound(xs.begin(), xs.end(), a + h) - xs.begin();
    if (lo >= hi) continue;
    for (auto l = lo; l < hi; ++l) k1[l] = denseleaf::eval_kernel(k, (xs[l] - a) * inv_h);
    double inner = 0.0;
    for (std::size_t j = 0; j < ay.x.size(); ++j) {
      const double b = ay.x[j];
      double sum = 0.0;
      for (auto l = lo; l < hi; ++l) {
        if (k1[l] == 0.0) continue;
        sum += k1[l] * denseleaf::eval_kernel(k, (ys[l] - b) * inv_h);
      }
      inner += ay.w[j] * sum;
    }
    total += ax.w[i] * inner * norm;
  }
  return total;
}

}  // namespace oracle
