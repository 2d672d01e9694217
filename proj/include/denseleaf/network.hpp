#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "denseleaf/rng.hpp"

namespace denseleaf {

struct Matrix {
  int rows = 0, cols = 0;
  std::vector<double> a;

  Matrix() = default;
  Matrix(int r, int c) : rows(r), cols(c), a(static_cast<std::size_t>(r) * c, 0.0) {}
  double* row(int i) { return a.data() + static_cast<std::size_t>(i) * cols; }
  const double* row(int i) const { return a.data() + static_cast<std::size_t>(i) * cols; }
};

//! Depth L (hidden layers), widths p_0..p_{L+1} with p_0 = input dim and
//! p_{L+1} = 1, sparsity budget s, and the sup-norm cap F of the class.
struct NetworkArchitecture {
  int depth = 0;
  std::vector<int> widths;
  long target_nonzero = 0;
  double sup_cap = 1.0;

  //! Nominal parameter count P = sum_j (p_{j+1} p_j + p_{j+1}).
  long total_params() const {
    long p = 0;
    for (std::size_t j = 0; j + 1 < widths.size(); ++j)
      p += static_cast<long>(widths[j + 1]) * widths[j] + widths[j + 1];
    return p;
  }

  void validate() const {
    if (depth < 1) throw std::invalid_argument("NetworkArchitecture: depth must be >= 1");
    if (static_cast<int>(widths.size()) != depth + 2)
      throw std::invalid_argument("NetworkArchitecture: widths must have depth+2 entries");
    for (int w : widths)
      if (w < 1) throw std::invalid_argument("NetworkArchitecture: widths must be positive");
    if (widths.back() != 1)
      throw std::invalid_argument("NetworkArchitecture: output width must be 1");
    if (sup_cap < 1.0) throw std::invalid_argument("NetworkArchitecture: F must be >= 1");
    if (target_nonzero < 1 || target_nonzero > total_params())
      throw std::invalid_argument("NetworkArchitecture: target_nonzero out of range");
  }
};

//! Weight matrices W_0..W_L, shift vectors v_0..v_L (v_0 pinned to zero),
//! and binary masks congruent to both. Masked entries are exactly zero.
struct NetworkParams {
  std::vector<Matrix> weights;
  std::vector<std::vector<double>> shifts;
  std::vector<Matrix> weight_masks;
  std::vector<std::vector<double>> shift_masks;

  long nonzero_count() const {
    long n = 0;
    for (const Matrix& w : weights)
      for (double v : w.a) n += (v != 0.0);
    for (const auto& s : shifts)
      for (double v : s) n += (v != 0.0);
    return n;
  }

  long count_above_one() const {
    long n = 0;
    for (const Matrix& w : weights)
      for (double v : w.a) n += (std::abs(v) > 1.0);
    for (const auto& s : shifts)
      for (double v : s) n += (std::abs(v) > 1.0);
    return n;
  }
};

//! Glorot-uniform weights, zero shifts, all masks active except v_0, which
//! stays identically zero by the network-form convention.
inline NetworkParams init_glorot(const NetworkArchitecture& arch, std::uint64_t seed) {
  arch.validate();
  NetworkParams p;
  Rng rng(seed);
  const int layers = arch.depth + 1;
  p.weights.reserve(layers);
  for (int j = 0; j < layers; ++j) {
    Matrix w(arch.widths[j + 1], arch.widths[j]);
    const double bound = std::sqrt(6.0 / (arch.widths[j] + arch.widths[j + 1]));
    for (double& v : w.a) v = bound * (2.0 * rng.uniform() - 1.0);
    p.weights.push_back(std::move(w));
    Matrix m(arch.widths[j + 1], arch.widths[j]);
    std::fill(m.a.begin(), m.a.end(), 1.0);
    p.weight_masks.push_back(std::move(m));
    p.shifts.emplace_back(arch.widths[j], 0.0);
    p.shift_masks.emplace_back(arch.widths[j], j == 0 ? 0.0 : 1.0);
  }
  return p;
}

//! x -> W_L sigma_{v_L} W_{L-1} ... W_1 sigma_{v_1} W_0 x, with the scalar
//! output clamped to [-F, F].
inline double forward(const NetworkParams& params, const NetworkArchitecture& arch,
                      const double* x) {
  const int layers = arch.depth + 1;
  std::vector<double> act(x, x + arch.widths[0]), next;
  for (int j = 0; j < layers; ++j) {
    const Matrix& w = params.weights[j];
    next.assign(w.rows, 0.0);
    for (int i = 0; i < w.rows; ++i) {
      const double* wi = w.row(i);
      double z = 0.0;
      for (int c = 0; c < w.cols; ++c) z += wi[c] * act[c];
      next[i] = z;
    }
    if (j + 1 < layers) {
      const auto& v = params.shifts[j + 1];
      for (int i = 0; i < w.rows; ++i) next[i] = std::max(next[i] - v[i], 0.0);
    }
    act.swap(next);
  }
  return std::clamp(act[0], -arch.sup_cap, arch.sup_cap);
}

inline double forward(const NetworkParams& params, const NetworkArchitecture& arch,
                      const std::vector<double>& x) {
  if (static_cast<int>(x.size()) != arch.widths[0])
    throw std::invalid_argument("forward: input dimension mismatch");
  return forward(params, arch, x.data());
}

struct LossGrad {
  double loss = 0.0;
  std::vector<Matrix> d_weights;
  std::vector<std::vector<double>> d_shifts;
};

//! Mean squared error plus l2 * sum W^2 (weights only), with reverse-mode
//! gradients. Gradients of masked entries are zeroed; the output clamp
//! passes gradient only strictly inside (-F, F).
inline LossGrad loss_and_gradient(const NetworkParams& params,
                                  const NetworkArchitecture& arch,
                                  const std::vector<double>& X,
                                  const std::vector<double>& Y, double l2) {
  const int d = arch.widths[0];
  const std::size_t B = Y.size();
  if (B == 0) throw std::invalid_argument("loss_and_gradient: empty batch");
  if (X.size() != B * static_cast<std::size_t>(d))
    throw std::invalid_argument("loss_and_gradient: X/Y shape mismatch");
  const int layers = arch.depth + 1;

  LossGrad out;
  out.d_weights.reserve(layers);
  for (int j = 0; j < layers; ++j) {
    out.d_weights.emplace_back(arch.widths[j + 1], arch.widths[j]);
    out.d_shifts.emplace_back(arch.widths[j], 0.0);
  }

  // Forward pass, batched row-major: act[j] is B x widths[j].
  std::vector<Matrix> act(layers + 1);
  act[0] = Matrix(static_cast<int>(B), d);
  std::copy(X.begin(), X.end(), act[0].a.begin());
  for (int j = 0; j < layers; ++j) {
    const Matrix& w = params.weights[j];
    act[j + 1] = Matrix(static_cast<int>(B), w.rows);
    for (std::size_t b = 0; b < B; ++b) {
      const double* in = act[j].row(static_cast<int>(b));
      double* zrow = act[j + 1].row(static_cast<int>(b));
      for (int i = 0; i < w.rows; ++i) {
        const double* wi = w.row(i);
        double z = 0.0;
        for (int c = 0; c < w.cols; ++c) z += wi[c] * in[c];
        zrow[i] = z;
      }
      if (j + 1 < layers) {
        const auto& v = params.shifts[j + 1];
        for (int i = 0; i < w.rows; ++i) zrow[i] = std::max(zrow[i] - v[i], 0.0);
      }
    }
  }

  // Loss and output-layer sensitivity.
  const double F = arch.sup_cap;
  double mse = 0.0;
  Matrix delta(static_cast<int>(B), 1);
  for (std::size_t b = 0; b < B; ++b) {
    const double raw = act[layers].row(static_cast<int>(b))[0];
    const double yhat = std::clamp(raw, -F, F);
    const double err = yhat - Y[b];
    mse += err * err;
    delta.row(static_cast<int>(b))[0] =
        (std::abs(raw) < F) ? 2.0 * err / static_cast<double>(B) : 0.0;
  }
  mse /= static_cast<double>(B);

  // Backward pass. act[j] holds post-activation values, which for hidden
  // layers are exactly max(z - v, 0); positivity identifies active units.
  Matrix cur = std::move(delta);
  for (int j = layers - 1; j >= 0; --j) {
    const Matrix& w = params.weights[j];
    Matrix& dw = out.d_weights[j];
    for (std::size_t b = 0; b < B; ++b) {
      const double* in = act[j].row(static_cast<int>(b));
      const double* dz = cur.row(static_cast<int>(b));
      for (int i = 0; i < w.rows; ++i) {
        const double g = dz[i];
        if (g == 0.0) continue;
        double* dwi = dw.row(i);
        for (int c = 0; c < w.cols; ++c) dwi[c] += g * in[c];
      }
    }
    if (j == 0) break;
    Matrix prev(static_cast<int>(B), w.cols);
    for (std::size_t b = 0; b < B; ++b) {
      const double* dz = cur.row(static_cast<int>(b));
      double* da = prev.row(static_cast<int>(b));
      for (int i = 0; i < w.rows; ++i) {
        const double g = dz[i];
        if (g == 0.0) continue;
        const double* wi = w.row(i);
        for (int c = 0; c < w.cols; ++c) da[c] += g * wi[c];
      }
      const double* a = act[j].row(static_cast<int>(b));
      auto& dv = out.d_shifts[j];
      for (int c = 0; c < w.cols; ++c) {
        if (a[c] > 0.0) {
          dv[c] -= da[c];
        } else {
          da[c] = 0.0;
        }
      }
    }
    cur = std::move(prev);
  }

  double penalty = 0.0;
  for (int j = 0; j < layers; ++j) {
    const Matrix& w = params.weights[j];
    Matrix& dw = out.d_weights[j];
    for (std::size_t k = 0; k < w.a.size(); ++k) {
      penalty += w.a[k] * w.a[k];
      dw.a[k] += 2.0 * l2 * w.a[k];
      dw.a[k] *= params.weight_masks[j].a[k];
    }
    for (std::size_t k = 0; k < out.d_shifts[j].size(); ++k)
      out.d_shifts[j][k] *= params.shift_masks[j][k];
  }
  out.loss = mse + l2 * penalty;
  return out;
}

//! Width ceil(sqrt(2n)) on every hidden layer and depth ceil(log2(2n)),
//! dense (target_nonzero = P) until a pruning rule assigns sparsity.
inline NetworkArchitecture architecture_from_n(long n, int d, double F) {
  if (n < 1) throw std::invalid_argument("architecture_from_n: n must be >= 1");
  const long twice = 2 * n;
  int L = 0;
  while ((1L << L) < twice) ++L;
  L = std::max(L, 1);
  long w = static_cast<long>(std::ceil(std::sqrt(static_cast<double>(twice))));
  while (w * w < twice) ++w;              // guard against FP sqrt rounding
  while ((w - 1) * (w - 1) >= twice) --w;
  NetworkArchitecture arch;
  arch.depth = L;
  arch.widths.assign(L + 2, static_cast<int>(w));
  arch.widths.front() = d;
  arch.widths.back() = 1;
  arch.sup_cap = F;
  arch.target_nonzero = arch.total_params();
  return arch;
}

//! Fraction of zero parameters 1 - 2 m log(m) phi_m / total, clamped into
//! [0, 1 - 1/total] so at least one parameter always survives.
inline double prune_fraction_rule(long m, double phi_m, long total_params) {
  if (total_params <= 0) throw std::invalid_argument("prune_fraction_rule: total_params <= 0");
  if (!(phi_m > 0.0) || phi_m > 1.0)
    throw std::invalid_argument("prune_fraction_rule: phi_m must be in (0,1]");
  const double raw =
      1.0 - 2.0 * static_cast<double>(m) * std::log(static_cast<double>(m)) * phi_m /
                static_cast<double>(total_params);
  return std::max(0.0, std::min(1.0 - 1.0 / static_cast<double>(total_params), raw));
}

struct TrainSchedule {
  int epochs = 1000;
  int batch_size = 0;  // 0 -> min(n, 64)
  double learning_rate = 1e-3;
  double l2 = 1e-5;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double ramp_start = 0.25;  // pruning ramp begins at this fraction of epochs
  int prune_every = 10;
};

struct TrainResult {
  double final_loss = 0.0;          // full-data MSE of the returned network
  std::vector<double> trace;        // per-epoch minibatch-mean MSE; last entry
                                    // is the final full-data MSE
  double nonzero_fraction = 0.0;    // nonzero parameters / nominal P
  double fraction_above_one = 0.0;  // |param| > 1 diagnostic, not enforced
};

namespace detail {

struct ParamRef {
  double* value;
  double* mask;
  double* m1;
  double* m2;
};

}  // namespace detail

//! Minibatch training with per-parameter adaptive steps from exponentially
//! weighted first/second moments, and magnitude pruning on a cubic ramp
//! from ramp_start to the end of training. Pruned masks are permanent; the
//! final nonzero count is max(1, round((1 - prune_fraction) P)).
inline TrainResult train(NetworkParams& params, const NetworkArchitecture& arch,
                         const std::vector<double>& X, const std::vector<double>& Y,
                         const TrainSchedule& schedule, double prune_fraction,
                         std::uint64_t seed) {
  arch.validate();
  if (Y.empty()) throw std::invalid_argument("train: empty data");
  if (!(prune_fraction >= 0.0 && prune_fraction < 1.0))
    throw std::invalid_argument("train: prune_fraction must be in [0,1)");
  const long P = arch.total_params();
  const long target_nonzero = std::max(1L, std::lround((1.0 - prune_fraction) * P));
  const std::size_t n = Y.size();
  const int d = arch.widths[0];
  const int layers = arch.depth + 1;
  const int batch = schedule.batch_size > 0
                        ? schedule.batch_size
                        : static_cast<int>(std::min<std::size_t>(n, 64));

  std::vector<Matrix> m1_w, m2_w;
  std::vector<std::vector<double>> m1_v, m2_v;
  for (int j = 0; j < layers; ++j) {
    m1_w.emplace_back(arch.widths[j + 1], arch.widths[j]);
    m2_w.emplace_back(arch.widths[j + 1], arch.widths[j]);
    m1_v.emplace_back(arch.widths[j], 0.0);
    m2_v.emplace_back(arch.widths[j], 0.0);
  }

  auto trainable_refs = [&]() {
    std::vector<detail::ParamRef> refs;
    for (int j = 0; j < layers; ++j) {
      for (std::size_t k = 0; k < params.weights[j].a.size(); ++k)
        refs.push_back({&params.weights[j].a[k], &params.weight_masks[j].a[k],
                        &m1_w[j].a[k], &m2_w[j].a[k]});
      if (j > 0)
        for (std::size_t k = 0; k < params.shifts[j].size(); ++k)
          refs.push_back({&params.shifts[j][k], &params.shift_masks[j][k],
                          &m1_v[j][k], &m2_v[j][k]});
    }
    return refs;
  };
  std::vector<detail::ParamRef> refs = trainable_refs();
  const long trainable = static_cast<long>(refs.size());

  auto prune_to = [&](long desired_zero) {
    long masked = 0;
    for (const auto& r : refs) masked += (*r.mask == 0.0);
    const long extra = desired_zero - masked;
    if (extra <= 0) return;
    std::vector<std::pair<double, std::size_t>> mags;
    mags.reserve(refs.size());
    for (std::size_t k = 0; k < refs.size(); ++k)
      if (*refs[k].mask != 0.0) mags.emplace_back(std::abs(*refs[k].value), k);
    std::nth_element(mags.begin(), mags.begin() + (extra - 1), mags.end());
    for (long i = 0; i < extra; ++i) {
      const auto& r = refs[mags[i].second];
      *r.mask = 0.0;
      *r.value = 0.0;
      *r.m1 = 0.0;
      *r.m2 = 0.0;
    }
  };

  const int ramp_begin = static_cast<int>(schedule.ramp_start * schedule.epochs);
  const long final_zero = std::max(0L, trainable - target_nonzero);

  Rng rng(seed_mix(seed, "train"));
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::vector<double> bx(static_cast<std::size_t>(batch) * d), by(batch);

  TrainResult result;
  long step = 0;
  for (int epoch = 0; epoch < schedule.epochs; ++epoch) {
    for (std::size_t i = n; i > 1; --i)
      std::swap(order[i - 1], order[rng.next_u64() % i]);
    double epoch_mse = 0.0;
    std::size_t seen = 0;
    for (std::size_t begin = 0; begin < n; begin += batch) {
      const std::size_t count = std::min<std::size_t>(batch, n - begin);
      bx.resize(count * d);
      by.resize(count);
      for (std::size_t b = 0; b < count; ++b) {
        const std::size_t src = order[begin + b];
        std::copy(X.begin() + src * d, X.begin() + (src + 1) * d, bx.begin() + b * d);
        by[b] = Y[src];
      }
      LossGrad lg = loss_and_gradient(params, arch, bx, by, schedule.l2);
      if (!std::isfinite(lg.loss))
        throw std::runtime_error("train: loss diverged at epoch " + std::to_string(epoch));
      {
        // lg.loss includes the l2 penalty; recover the MSE share for the trace.
        double penalty = 0.0;
        for (int j = 0; j < layers; ++j)
          for (double w : params.weights[j].a) penalty += w * w;
        epoch_mse += (lg.loss - schedule.l2 * penalty) * static_cast<double>(count);
      }
      seen += count;
      ++step;
      const double corr1 = 1.0 - std::pow(schedule.beta1, static_cast<double>(step));
      const double corr2 = 1.0 - std::pow(schedule.beta2, static_cast<double>(step));
      std::size_t ref_i = 0;
      for (int j = 0; j < layers; ++j) {
        for (std::size_t k = 0; k < params.weights[j].a.size(); ++k, ++ref_i) {
          const auto& r = refs[ref_i];
          if (*r.mask == 0.0) continue;
          const double g = lg.d_weights[j].a[k];
          *r.m1 = schedule.beta1 * *r.m1 + (1.0 - schedule.beta1) * g;
          *r.m2 = schedule.beta2 * *r.m2 + (1.0 - schedule.beta2) * g * g;
          *r.value -= schedule.learning_rate * (*r.m1 / corr1) /
                      (std::sqrt(*r.m2 / corr2) + schedule.eps);
        }
        if (j > 0)
          for (std::size_t k = 0; k < params.shifts[j].size(); ++k, ++ref_i) {
            const auto& r = refs[ref_i];
            if (*r.mask == 0.0) continue;
            const double g = lg.d_shifts[j][k];
            *r.m1 = schedule.beta1 * *r.m1 + (1.0 - schedule.beta1) * g;
            *r.m2 = schedule.beta2 * *r.m2 + (1.0 - schedule.beta2) * g * g;
            *r.value -= schedule.learning_rate * (*r.m1 / corr1) /
                        (std::sqrt(*r.m2 / corr2) + schedule.eps);
          }
      }
    }
    result.trace.push_back(epoch_mse / static_cast<double>(seen));

    if (prune_fraction > 0.0 && epoch >= ramp_begin) {
      const bool last = (epoch == schedule.epochs - 1);
      if (last || (epoch - ramp_begin) % schedule.prune_every == 0) {
        const double span = std::max(1, schedule.epochs - 1 - ramp_begin);
        const double t = std::min(1.0, static_cast<double>(epoch - ramp_begin) / span);
        const double frac = last ? 1.0 : 1.0 - std::pow(1.0 - t, 3.0);
        prune_to(std::lround(frac * static_cast<double>(final_zero)));
      }
    }
  }

  // Final full-data MSE of the returned network; appended so the reported
  // loss equals the trace's last entry.
  double final_mse = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double err = forward(params, arch, X.data() + i * d) - Y[i];
    final_mse += err * err;
  }
  final_mse /= static_cast<double>(n);
  result.final_loss = final_mse;
  result.trace.push_back(final_mse);
  result.nonzero_fraction =
      static_cast<double>(params.nonzero_count()) / static_cast<double>(P);
  result.fraction_above_one =
      static_cast<double>(params.count_above_one()) / static_cast<double>(P);
  return result;
}

// ---------------------------------------------------------------------------
// Composition rates and entropy

//! Composition f = g_q o ... o g_0 with g_i depending on t_i variables at
//! smoothness alpha_i.
struct CompositionDescriptor {
  int q = 0;
  std::vector<int> t;        // q+1 entries
  std::vector<double> alpha; // q+1 entries

  void validate() const {
    if (q < 0 || t.size() != static_cast<std::size_t>(q) + 1 ||
        alpha.size() != static_cast<std::size_t>(q) + 1)
      throw std::invalid_argument("CompositionDescriptor: length mismatch");
    for (int ti : t)
      if (ti < 1) throw std::invalid_argument("CompositionDescriptor: t must be positive");
    for (double a : alpha)
      if (!(a > 0.0)) throw std::invalid_argument("CompositionDescriptor: alpha must be positive");
  }
};

struct RateResult {
  double phi_n = 0.0;
  std::vector<double> alpha_star;
};

//! alpha*_i = alpha_i prod_{l>i} min(alpha_l, 1), and
//! phi_n = max_i n^{-2 alpha*_i / (2 alpha*_i + t_i)}.
inline RateResult rate_phi(const CompositionDescriptor& c, long n) {
  c.validate();
  if (n < 2) throw std::invalid_argument("rate_phi: n must be >= 2");
  RateResult out;
  out.alpha_star.resize(c.alpha.size());
  for (std::size_t i = 0; i < c.alpha.size(); ++i) {
    double a = c.alpha[i];
    for (std::size_t l = i + 1; l < c.alpha.size(); ++l) a *= std::min(c.alpha[l], 1.0);
    out.alpha_star[i] = a;
  }
  out.phi_n = 0.0;
  for (std::size_t i = 0; i < c.alpha.size(); ++i) {
    const double a = out.alpha_star[i];
    out.phi_n = std::max(out.phi_n,
                         std::pow(static_cast<double>(n), -2.0 * a / (2.0 * a + c.t[i])));
  }
  return out;
}

//! (s+1) log(2^{2L+5} delta^{-1} (L+1) p0^2 pL1^2 s^{2L}), natural log,
//! evaluated in log space.
inline double entropy_bound(long L, long p0, long pL1, long s, double delta) {
  if (L < 1 || p0 < 1 || pL1 < 1 || s < 1)
    throw std::invalid_argument("entropy_bound: arguments must be positive");
  if (!(delta > 0.0)) throw std::invalid_argument("entropy_bound: delta must be positive");
  const double log2v = std::log(2.0);
  const double inner = (2.0 * L + 5.0) * log2v - std::log(delta) +
                       std::log(static_cast<double>(L + 1)) +
                       2.0 * std::log(static_cast<double>(p0)) +
                       2.0 * std::log(static_cast<double>(pL1)) +
                       2.0 * L * std::log(static_cast<double>(s));
  return (s + 1.0) * inner;
}

// ---------------------------------------------------------------------------
// Serialization

inline nlohmann::json network_to_json(const NetworkParams& params,
                                      const NetworkArchitecture& arch,
                                      std::uint64_t seed) {
  nlohmann::json j;
  j["arch"] = {{"depth", arch.depth},
               {"widths", arch.widths},
               {"target_nonzero", arch.target_nonzero},
               {"F", arch.sup_cap}};
  j["seed"] = seed;
  auto mats = [](const std::vector<Matrix>& ms) {
    nlohmann::json arr = nlohmann::json::array();
    for (const Matrix& m : ms) arr.push_back({{"rows", m.rows}, {"cols", m.cols}, {"a", m.a}});
    return arr;
  };
  j["weights"] = mats(params.weights);
  j["weight_masks"] = mats(params.weight_masks);
  j["shifts"] = params.shifts;
  j["shift_masks"] = params.shift_masks;
  return j;
}

inline std::pair<NetworkParams, NetworkArchitecture> network_from_json(
    const nlohmann::json& j) {
  NetworkArchitecture arch;
  arch.depth = j.at("arch").at("depth").get<int>();
  arch.widths = j.at("arch").at("widths").get<std::vector<int>>();
  arch.target_nonzero = j.at("arch").at("target_nonzero").get<long>();
  arch.sup_cap = j.at("arch").at("F").get<double>();
  NetworkParams p;
  auto mats = [](const nlohmann::json& arr) {
    std::vector<Matrix> ms;
    for (const auto& mj : arr) {
      Matrix m(mj.at("rows").get<int>(), mj.at("cols").get<int>());
      m.a = mj.at("a").get<std::vector<double>>();
      ms.push_back(std::move(m));
    }
    return ms;
  };
  p.weights = mats(j.at("weights"));
  p.weight_masks = mats(j.at("weight_masks"));
  p.shifts = j.at("shifts").get<std::vector<std::vector<double>>>();
  p.shift_masks = j.at("shift_masks").get<std::vector<std::vector<double>>>();
  return {std::move(p), std::move(arch)};
}

}  // namespace denseleaf
