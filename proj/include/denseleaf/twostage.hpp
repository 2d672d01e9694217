#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "denseleaf/dataset.hpp"
#include "denseleaf/densities.hpp"
#include "denseleaf/kde.hpp"
#include "denseleaf/kernels.hpp"
#include "denseleaf/network.hpp"

namespace denseleaf {

enum class Method { SD, FD, KDE };

inline std::string method_name(Method m) {
  switch (m) {
    case Method::SD: return "SD";
    case Method::FD: return "FD";
    default: return "KDE";
  }
}

//! Frozen estimator: a trained network or a kernel density estimate, plus
//! the provenance needed to audit the fit.
struct EstimatorHandle {
  struct NetPayload {
    NetworkParams params;
    NetworkArchitecture arch;
  };
  struct KdePayload {
    Dataset train;
    KernelSpec kernel;
    double h = 0.0;
  };
  struct Provenance {
    std::uint64_t seed = 0;
    double bandwidth_constant = 0.0;
    double bandwidth = 0.0;
    std::vector<double> responses;
    double final_train_loss = std::numeric_limits<double>::quiet_NaN();
    double nonzero_fraction = std::numeric_limits<double>::quiet_NaN();
    double fraction_above_one = std::numeric_limits<double>::quiet_NaN();
    int epochs = 0;
  };

  Method method = Method::KDE;
  std::variant<NetPayload, KdePayload> payload;
  Provenance provenance;

  double eval(const double* x) const {
    if (const auto* net = std::get_if<NetPayload>(&payload))
      return forward(net->params, net->arch, x);
    const auto& kde = std::get<KdePayload>(payload);
    return kde_eval_point(kde.train, kde.kernel, kde.h, x);
  }

  std::vector<double> eval_batch(const std::vector<double>& points, int dim,
                                 int threads = 1) const {
    const std::size_t n = points.size() / dim;
    std::vector<double> out(n);
    auto work = [&](std::size_t lo, std::size_t hi) {
      for (std::size_t i = lo; i < hi; ++i) out[i] = eval(points.data() + i * dim);
    };
    if (threads <= 1 || n < 1024) {
      work(0, n);
    } else {
      std::vector<std::thread> pool;
      const std::size_t chunk = (n + threads - 1) / threads;
      for (int t = 0; t < threads; ++t) {
        const std::size_t lo = std::min(n, t * chunk);
        const std::size_t hi = std::min(n, lo + chunk);
        if (lo < hi) pool.emplace_back(work, lo, hi);
      }
      for (auto& th : pool) th.join();
    }
    return out;
  }
};

struct FitOptions {
  double F = 10.0;             // network class sup cap
  double phi_eta = 0.0;        // phi_m = m^{eta - 1/2}; eta = 0 endpoint
  TrainSchedule schedule;
  bool fd_leave_one_out = false;  // ablation toggle; FD default keeps the
                                  // point's own kernel term
  int threads = 1;
};

namespace detail {

inline EstimatorHandle fit_network_method(Method method, const Dataset& regression,
                                          const std::vector<double>& responses,
                                          long rule_m, double c, double h,
                                          const FitOptions& opt, std::uint64_t seed) {
  NetworkArchitecture arch = architecture_from_n(rule_m, regression.dim, opt.F);
  const double phi_m = std::pow(static_cast<double>(rule_m), opt.phi_eta - 0.5);
  const double pf = prune_fraction_rule(rule_m, phi_m, arch.total_params());
  arch.target_nonzero = std::max(1L, std::lround((1.0 - pf) * arch.total_params()));
  NetworkParams params = init_glorot(arch, seed_mix(seed, "init"));
  const TrainResult tr =
      train(params, arch, regression.points, responses, opt.schedule, pf, seed);

  EstimatorHandle handle;
  handle.method = method;
  handle.payload = EstimatorHandle::NetPayload{std::move(params), std::move(arch)};
  handle.provenance.seed = seed;
  handle.provenance.bandwidth_constant = c;
  handle.provenance.bandwidth = h;
  handle.provenance.responses = responses;
  handle.provenance.final_train_loss = tr.final_loss;
  handle.provenance.nonzero_fraction = tr.nonzero_fraction;
  handle.provenance.fraction_above_one = tr.fraction_above_one;
  handle.provenance.epochs = opt.schedule.epochs;
  return handle;
}

}  // namespace detail

//! Split-data two-stage fit: the second half of the sample feeds the
//! undersmoothed KDE, whose values at the first half become regression
//! responses for the network.
inline EstimatorHandle fit_sd(const Dataset& data_2n, const KernelSpec& kernel,
                              double c1, const FitOptions& opt, std::uint64_t seed) {
  const std::size_t total = data_2n.size();
  if (total % 2 != 0) throw std::invalid_argument("fit_sd: dataset size must be even");
  const std::size_t n = total / 2;
  if (n < 2) throw std::invalid_argument("fit_sd: needs at least 4 points");
  const int d = data_2n.dim;

  Dataset regression, kernel_set;
  regression.dim = kernel_set.dim = d;
  regression.points.assign(data_2n.points.begin(), data_2n.points.begin() + n * d);
  kernel_set.points.assign(data_2n.points.begin() + n * d, data_2n.points.end());

  const double h = resolve_bandwidth(BandwidthRule::scaled_theory(c1),
                                     static_cast<long>(n), d);
  const std::vector<double> responses =
      generate_responses(kernel_set, regression, kernel, h, opt.threads);
  return detail::fit_network_method(Method::SD, regression, responses,
                                    static_cast<long>(n), c1, h, opt, seed);
}

//! Full-data variant: both steps consume all 2n points; each response
//! includes the point's own kernel term unless leave-one-out is requested.
inline EstimatorHandle fit_fd(const Dataset& data_2n, const KernelSpec& kernel,
                              double c2, const FitOptions& opt, std::uint64_t seed) {
  const std::size_t m = data_2n.size();
  if (m % 2 != 0) throw std::invalid_argument("fit_fd: dataset size must be even");
  if (m < 4) throw std::invalid_argument("fit_fd: needs at least 4 points");
  const int d = data_2n.dim;
  const double h = resolve_bandwidth(BandwidthRule::scaled_theory(c2),
                                     static_cast<long>(m), d);
  std::vector<double> responses = generate_responses(data_2n, data_2n, kernel, h, opt.threads);
  if (opt.fd_leave_one_out) {
    const double own = std::pow(eval_kernel(kernel, 0.0), d) / std::pow(h, d);
    for (double& y : responses)
      y = (static_cast<double>(m) * y - own) / static_cast<double>(m - 1);
  }
  return detail::fit_network_method(Method::FD, data_2n, responses,
                                    static_cast<long>(m), c2, h, opt, seed);
}

//! Reference KDE on the full sample with bandwidth c3 m^{-1/(2 beta + d)}.
inline EstimatorHandle fit_kde_reference(const Dataset& data_2n, const KernelSpec& kernel,
                                         double c3, double beta) {
  const long m = static_cast<long>(data_2n.size());
  const double h =
      resolve_bandwidth(BandwidthRule::kde_reference(c3, beta), m, data_2n.dim);
  EstimatorHandle handle;
  handle.method = Method::KDE;
  handle.payload = EstimatorHandle::KdePayload{data_2n, kernel, h};
  handle.provenance.bandwidth_constant = c3;
  handle.provenance.bandwidth = h;
  return handle;
}

//! Monte-Carlo risk estimate against a known truth.
struct RiskReport {
  double test_error = 0.0;
  double zero_baseline = 0.0;
  double train_error = std::numeric_limits<double>::quiet_NaN();
  double optimization_gap_proxy = std::numeric_limits<double>::quiet_NaN();
  long n_test = 0;
};

//! Core of evaluate(): test error of an arbitrary evaluator against the
//! truth on n_test fresh draws. Exposed so exact reference functions can be
//! pushed through the same path.
inline RiskReport evaluate_fn(const std::function<double(const double*)>& fhat,
                              const DensityModel& truth, long n_test,
                              std::uint64_t seed) {
  if (n_test < 1) throw std::invalid_argument("evaluate: n_test must be >= 1");
  const Dataset test = truth.sample(static_cast<std::size_t>(n_test), seed);
  double err = 0.0, base = 0.0;
  for (std::size_t i = 0; i < test.size(); ++i) {
    const double* x = test.row(i);
    const double f0 = truth.eval(x);
    const double fh = fhat(x);
    err += (fh - f0) * (fh - f0);
    base += f0 * f0;
  }
  RiskReport rep;
  rep.test_error = err / static_cast<double>(n_test);
  rep.zero_baseline = base / static_cast<double>(n_test);
  rep.n_test = n_test;
  return rep;
}

inline RiskReport evaluate(const EstimatorHandle& handle, const DensityModel& truth,
                           long n_test, std::uint64_t seed, int threads = 1) {
  if (n_test < 1) throw std::invalid_argument("evaluate: n_test must be >= 1");
  const Dataset test = truth.sample(static_cast<std::size_t>(n_test), seed);
  const int d = test.dim;
  const std::vector<double> fhat = handle.eval_batch(test.points, d, threads);
  double err = 0.0, base = 0.0;
  for (std::size_t i = 0; i < test.size(); ++i) {
    const double f0 = truth.eval(test.row(i));
    err += (fhat[i] - f0) * (fhat[i] - f0);
    base += f0 * f0;
  }
  RiskReport rep;
  rep.test_error = err / static_cast<double>(n_test);
  rep.zero_baseline = base / static_cast<double>(n_test);
  rep.train_error = handle.provenance.final_train_loss;
  rep.n_test = n_test;
  return rep;
}

// ---------------------------------------------------------------------------
// Persistence: network serialization plus a small manifest; KDE payloads
// inline their training sample (desk-scale sizes).

inline nlohmann::json handle_to_json(const EstimatorHandle& handle) {
  nlohmann::json j;
  j["method"] = method_name(handle.method);
  j["provenance"] = {{"seed", handle.provenance.seed},
                     {"bandwidth_constant", handle.provenance.bandwidth_constant},
                     {"bandwidth", handle.provenance.bandwidth},
                     {"responses", handle.provenance.responses},
                     {"epochs", handle.provenance.epochs}};
  if (const auto* net = std::get_if<EstimatorHandle::NetPayload>(&handle.payload)) {
    j["network"] = network_to_json(net->params, net->arch, handle.provenance.seed);
    j["provenance"]["final_train_loss"] = handle.provenance.final_train_loss;
    j["provenance"]["nonzero_fraction"] = handle.provenance.nonzero_fraction;
    j["provenance"]["fraction_above_one"] = handle.provenance.fraction_above_one;
  } else {
    const auto& kde = std::get<EstimatorHandle::KdePayload>(handle.payload);
    j["kde"] = {{"dim", kde.train.dim},
                {"points", kde.train.points},
                {"kernel_order", kde.kernel.order},
                {"h", kde.h}};
  }
  return j;
}

inline EstimatorHandle handle_from_json(const nlohmann::json& j) {
  EstimatorHandle handle;
  const std::string name = j.at("method").get<std::string>();
  handle.method = name == "SD" ? Method::SD : name == "FD" ? Method::FD : Method::KDE;
  const auto& prov = j.at("provenance");
  handle.provenance.seed = prov.value("seed", 0ull);
  handle.provenance.bandwidth_constant = prov.value("bandwidth_constant", 0.0);
  handle.provenance.bandwidth = prov.value("bandwidth", 0.0);
  handle.provenance.responses = prov.value("responses", std::vector<double>{});
  handle.provenance.epochs = prov.value("epochs", 0);
  if (j.contains("network")) {
    auto [params, arch] = network_from_json(j.at("network"));
    handle.payload = EstimatorHandle::NetPayload{std::move(params), std::move(arch)};
    handle.provenance.final_train_loss = prov.value("final_train_loss", 0.0);
    handle.provenance.nonzero_fraction = prov.value("nonzero_fraction", 0.0);
    handle.provenance.fraction_above_one = prov.value("fraction_above_one", 0.0);
  } else {
    const auto& kj = j.at("kde");
    Dataset train;
    train.dim = kj.at("dim").get<int>();
    train.points = kj.at("points").get<std::vector<double>>();
    handle.payload = EstimatorHandle::KdePayload{
        std::move(train), build_order_kernel(kj.at("kernel_order").get<int>()),
        kj.at("h").get<double>()};
  }
  return handle;
}

}  // namespace denseleaf
