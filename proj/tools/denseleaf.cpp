// Command-line harness: calibrate bandwidth constants, run experiments,
// evaluate saved estimators, run the theory checks, and print rate /
// entropy values.
//
// Exit codes: 0 success, 1 configuration or usage error, 2 runtime failure.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "denseleaf/denseleaf.hpp"

namespace {

using namespace denseleaf;

nlohmann::json load_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open file: " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument("invalid JSON in " + path + ": " + e.what());
  }
  return j;
}

struct RunFlags {
  std::string config_path;
  std::string out_dir;
  std::uint64_t seed = 0;
  bool seed_set = false;
  int replicates = 0;
  long n_test = 0;
  int threads = 0;
};

int cmd_calibrate(const RunFlags& flags) {
  ExperimentConfig cfg = config_from_json(load_json(flags.config_path));
  if (flags.seed_set) cfg.master_seed = flags.seed;
  if (flags.threads > 0) cfg.threads = flags.threads;
  const CalibrationResult c = calibrate_constants(cfg, resolve_threads(cfg.threads));
  nlohmann::json out{{"c1", c.c1}, {"c2", c.c2}, {"c3", c.c3}};
  std::cout << out.dump(2) << "\n";
  if (!flags.out_dir.empty()) {
    std::ofstream f(flags.out_dir);
    f << out.dump(2) << "\n";
  }
  return 0;
}

int cmd_run(const RunFlags& flags) {
  ExperimentConfig cfg = config_from_json(load_json(flags.config_path));
  if (flags.seed_set) cfg.master_seed = flags.seed;
  if (!flags.out_dir.empty()) cfg.output_dir = flags.out_dir;
  if (flags.replicates > 0) cfg.replicates = flags.replicates;
  if (flags.n_test > 0) cfg.n_test = flags.n_test;
  if (flags.threads > 0) cfg.threads = flags.threads;
  const auto rows = run_experiment(cfg);
  const std::string results = cfg.output_dir + "/results.csv";
  emit_plot_data(results, "boxplot");
  emit_plot_data(results, "scatter");
  long failures = 0;
  for (const auto& r : rows) failures += !r.error.empty();
  std::cout << "wrote " << rows.size() << " rows to " << results
            << " (" << failures << " failed)\n";
  std::cout << "summary: " << cfg.output_dir << "/summary.json\n";
  return 0;
}

int cmd_evaluate(const std::string& estimator_path, const std::string& model_path,
                 long n_test, std::uint64_t seed, int threads) {
  const EstimatorHandle handle = handle_from_json(load_json(estimator_path));
  const DensityModel model = model_from_descriptor(load_json(model_path));
  const RiskReport rep = evaluate(handle, model, n_test, seed, resolve_threads(threads));
  nlohmann::json out{{"method", method_name(handle.method)},
                     {"test_error", rep.test_error},
                     {"zero_baseline", rep.zero_baseline},
                     {"n_test", rep.n_test}};
  if (!std::isnan(rep.train_error)) out["train_error"] = rep.train_error;
  std::cout << out.dump(2) << "\n";
  return 0;
}

int cmd_theory_check(long trials, std::uint64_t seed, const std::string& out_path) {
  std::vector<CheckReport> reports;
  reports.push_back(check_poissonization(5, BoundedStatistic::half_box_indicator(1),
                                         ThresholdSet::at_least(5.0), trials, seed));
  const KernelSpec box = build_order_kernel(0);
  for (int d : {1, 2}) {
    const DeclaredTruth truth = make_linear_product_truth(d);
    for (int e = 2; e <= 6; ++e) {
      std::vector<std::vector<double>> probes;
      for (double base : {0.3, 0.5, 0.62}) probes.push_back(std::vector<double>(d, base));
      reports.push_back(check_bias_bound(truth.model, truth.beta, truth.F, box,
                                         std::ldexp(1.0, -e), probes));
    }
  }
  {
    const DeclaredTruth truth = make_linear_product_truth(1);
    reports.push_back(
        check_noise_variance(truth.model, truth.F, box, 0.25, trials, seed + 1));
  }
  std::ostream* out = &std::cout;
  std::ofstream file;
  if (!out_path.empty()) {
    file.open(out_path);
    out = &file;
  }
  bool all_pass = true;
  for (const CheckReport& r : reports) {
    *out << r.to_json().dump() << "\n";
    all_pass = all_pass && (r.pass || r.inconclusive);
  }
  return all_pass ? 0 : 2;
}

int cmd_rates(int q, std::vector<double> alpha, std::vector<int> t, long n,
              long L, long p0, long pL1, long s, double delta) {
  CompositionDescriptor c;
  c.q = q;
  c.alpha = std::move(alpha);
  c.t = std::move(t);
  const RateResult r = rate_phi(c, n);
  std::printf("%.12g\n", r.phi_n);
  std::printf("alpha_star:");
  for (double a : r.alpha_star) std::printf(" %.12g", a);
  std::printf("\n");
  if (L > 0) std::printf("entropy_bound: %.12g\n", entropy_bound(L, p0, pL1, s, delta));
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"two-stage nonparametric density estimation harness"};
  app.require_subcommand(1);

  RunFlags flags;
  auto add_common = [&](CLI::App* sub, bool with_run_overrides) {
    sub->add_option("--config", flags.config_path, "experiment config JSON")->required();
    sub->add_option("--seed", flags.seed, "master seed override")
        ->each([&](const std::string&) { flags.seed_set = true; });
    sub->add_option("--threads", flags.threads, "worker thread count");
    if (with_run_overrides) {
      sub->add_option("--out", flags.out_dir, "output directory override");
      sub->add_option("--replicates", flags.replicates, "replicate count override");
      sub->add_option("--n-test", flags.n_test, "test sample size override");
    } else {
      sub->add_option("--out", flags.out_dir, "also write the result to this file");
    }
  };

  CLI::App* calibrate = app.add_subcommand("calibrate", "cross-validate bandwidth constants");
  add_common(calibrate, false);
  CLI::App* run = app.add_subcommand("run", "run the experiment protocol");
  add_common(run, true);

  std::string estimator_path, model_path;
  long eval_n_test = 100000;
  std::uint64_t eval_seed = 1;
  int eval_threads = 0;
  CLI::App* evaluate_cmd = app.add_subcommand("evaluate", "risk of a saved estimator");
  evaluate_cmd->add_option("--estimator", estimator_path, "estimator JSON")->required();
  evaluate_cmd->add_option("--model", model_path, "model descriptor JSON")->required();
  evaluate_cmd->add_option("--n-test", eval_n_test, "test sample size");
  evaluate_cmd->add_option("--seed", eval_seed, "test sample seed");
  evaluate_cmd->add_option("--threads", eval_threads, "worker thread count");

  long tc_trials = 20000;
  std::uint64_t tc_seed = 1;
  std::string tc_out;
  CLI::App* theory = app.add_subcommand("theory-check", "Monte-Carlo bound checks");
  theory->add_option("--trials", tc_trials, "Monte-Carlo trials per check");
  theory->add_option("--seed", tc_seed, "RNG seed");
  theory->add_option("--out", tc_out, "write JSON lines here instead of stdout");

  int rq = 0;
  std::vector<double> ralpha;
  std::vector<int> rt;
  long rn = 0, rL = 0, rp0 = 1, rpL1 = 1, rs = 1;
  double rdelta = 1.0;
  CLI::App* rates = app.add_subcommand("rates", "composition rate and entropy values");
  rates->add_option("--q", rq, "composition depth q")->required();
  rates->add_option("--alpha", ralpha, "smoothness per layer")->required()->delimiter(',');
  rates->add_option("--t", rt, "active variables per layer")->required()->delimiter(',');
  rates->add_option("--n", rn, "sample size")->required();
  rates->add_option("--L", rL, "network depth for the entropy bound");
  rates->add_option("--p0", rp0, "input width");
  rates->add_option("--pL1", rpL1, "output width");
  rates->add_option("--s", rs, "sparsity");
  rates->add_option("--delta", rdelta, "covering radius");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  try {
    if (*calibrate) return cmd_calibrate(flags);
    if (*run) return cmd_run(flags);
    if (*evaluate_cmd)
      return cmd_evaluate(estimator_path, model_path, eval_n_test, eval_seed, eval_threads);
    if (*theory) return cmd_theory_check(tc_trials, tc_seed, tc_out);
    if (*rates) return cmd_rates(rq, ralpha, rt, rn, rL, rp0, rpL1, rs, rdelta);
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 1;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "runtime failure: " << e.what() << "\n";
    return 2;
  }
  return 1;
}
