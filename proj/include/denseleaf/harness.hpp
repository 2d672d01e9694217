#pragma once

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "denseleaf/densities.hpp"
#include "denseleaf/kde.hpp"
#include "denseleaf/twostage.hpp"

namespace denseleaf {

struct CalibrationConfig {
  double grid_lo = 0.05;
  double grid_hi = 1.1;
  double grid_step = 0.005;
  int folds = 50;
  long n_cal = 200;     // full-sample reference size for calibration
  int n_datasets = 5;
  int grid_nodes = 65;  // per-axis quadrature nodes in the CV score
};

//! Declarative experiment description. sample_sizes are full training
//! sample sizes (the 2n of the split construction).
struct ExperimentConfig {
  std::string family = "NBm";
  int d = 2;
  std::uint64_t density_seed = 1;
  int resolution = 4096;
  std::vector<long> sample_sizes{200, 1000};
  int replicates = 10;
  std::vector<Method> methods{Method::SD, Method::FD, Method::KDE};
  CalibrationConfig calibration;
  long n_test = 100000;
  TrainSchedule schedule;
  double F = 10.0;
  double beta_ref = 0.5;  // smoothness used by the reference KDE bandwidth
  double phi_eta = 0.0;
  int kernel_order = 0;
  std::uint64_t master_seed = 1;
  std::string output_dir = ".";
  int threads = 0;  // 0 -> --threads / DENSELEAF_THREADS / hardware
  bool record_wall_time = true;
  bool fresh_sample_per_replicate = false;
  bool fd_leave_one_out = false;
  double c1 = 0.0, c2 = 0.0, c3 = 0.0;  // 0 -> calibrate
  DagModelOptions::IndexRule shifting_rule = DagModelOptions::IndexRule::JDivisibleBy3;
  DagModelOptions::IndexRule rough_rule = DagModelOptions::IndexRule::JMinus1DivisibleBy3;

  DagModelOptions dag_options() const {
    DagModelOptions opts;
    opts.resolution = resolution;
    opts.shifting_rule = shifting_rule;
    opts.rough_rule = rough_rule;
    return opts;
  }

  void validate() const {
    if (replicates < 1) throw std::invalid_argument("config: replicates must be >= 1");
    if (sample_sizes.empty()) throw std::invalid_argument("config: sample_sizes empty");
    if (!(calibration.grid_lo < calibration.grid_hi))
      throw std::invalid_argument("config: grid_lo must be < grid_hi");
    if (methods.empty()) throw std::invalid_argument("config: no methods selected");
    if (n_test < 1) throw std::invalid_argument("config: n_test must be >= 1");
  }
};

inline ExperimentConfig config_from_json(const nlohmann::json& j) {
  ExperimentConfig cfg;
  if (j.contains("model")) {
    const auto& m = j.at("model");
    cfg.family = m.value("family", cfg.family);
    cfg.d = m.value("d", cfg.d);
    cfg.density_seed = m.value("seed", cfg.density_seed);
    cfg.resolution = m.value("resolution", cfg.resolution);
    auto parse_rule = [](const std::string& s) {
      if (s == "j_divisible_by_3") return DagModelOptions::IndexRule::JDivisibleBy3;
      if (s == "j_minus_1_divisible_by_3")
        return DagModelOptions::IndexRule::JMinus1DivisibleBy3;
      throw std::invalid_argument("config: unknown index rule " + s);
    };
    if (m.contains("shifting_rule"))
      cfg.shifting_rule = parse_rule(m.at("shifting_rule").get<std::string>());
    if (m.contains("rough_rule"))
      cfg.rough_rule = parse_rule(m.at("rough_rule").get<std::string>());
  }
  cfg.sample_sizes = j.value("sample_sizes", cfg.sample_sizes);
  cfg.replicates = j.value("replicates", cfg.replicates);
  if (j.contains("methods")) {
    cfg.methods.clear();
    for (const auto& name : j.at("methods")) {
      const std::string s = name.get<std::string>();
      if (s == "SD") cfg.methods.push_back(Method::SD);
      else if (s == "FD") cfg.methods.push_back(Method::FD);
      else if (s == "KDE") cfg.methods.push_back(Method::KDE);
      else throw std::invalid_argument("config: unknown method " + s);
    }
  }
  if (j.contains("calibration")) {
    const auto& c = j.at("calibration");
    cfg.calibration.grid_lo = c.value("grid_lo", cfg.calibration.grid_lo);
    cfg.calibration.grid_hi = c.value("grid_hi", cfg.calibration.grid_hi);
    cfg.calibration.grid_step = c.value("grid_step", cfg.calibration.grid_step);
    cfg.calibration.folds = c.value("folds", cfg.calibration.folds);
    cfg.calibration.n_cal = c.value("n_cal", cfg.calibration.n_cal);
    cfg.calibration.n_datasets = c.value("n_datasets", cfg.calibration.n_datasets);
    cfg.calibration.grid_nodes = c.value("grid_nodes", cfg.calibration.grid_nodes);
  }
  cfg.n_test = j.value("n_test", cfg.n_test);
  if (j.contains("train")) {
    const auto& t = j.at("train");
    cfg.schedule.epochs = t.value("epochs", cfg.schedule.epochs);
    cfg.schedule.batch_size = t.value("batch_size", cfg.schedule.batch_size);
    cfg.schedule.learning_rate = t.value("learning_rate", cfg.schedule.learning_rate);
    cfg.schedule.l2 = t.value("l2", cfg.schedule.l2);
    cfg.schedule.ramp_start = t.value("ramp_start", cfg.schedule.ramp_start);
    cfg.schedule.prune_every = t.value("prune_every", cfg.schedule.prune_every);
  }
  cfg.F = j.value("F", cfg.F);
  cfg.beta_ref = j.value("beta_ref", cfg.beta_ref);
  cfg.phi_eta = j.value("phi_eta", cfg.phi_eta);
  cfg.kernel_order = j.value("kernel_order", cfg.kernel_order);
  cfg.master_seed = j.value("master_seed", cfg.master_seed);
  cfg.output_dir = j.value("output_dir", cfg.output_dir);
  cfg.threads = j.value("threads", cfg.threads);
  cfg.record_wall_time = j.value("record_wall_time", cfg.record_wall_time);
  cfg.fresh_sample_per_replicate =
      j.value("fresh_sample_per_replicate", cfg.fresh_sample_per_replicate);
  cfg.fd_leave_one_out = j.value("fd_leave_one_out", cfg.fd_leave_one_out);
  cfg.c1 = j.value("c1", cfg.c1);
  cfg.c2 = j.value("c2", cfg.c2);
  cfg.c3 = j.value("c3", cfg.c3);
  cfg.validate();
  return cfg;
}

struct ResultRow {
  std::string model;
  int d = 0;
  long n = 0;
  std::string method;
  int replicate = 0;
  std::uint64_t seed = 0;
  double train_error = std::numeric_limits<double>::quiet_NaN();
  double test_error = std::numeric_limits<double>::quiet_NaN();
  double zero_baseline = std::numeric_limits<double>::quiet_NaN();
  double optimization_gap_proxy = std::numeric_limits<double>::quiet_NaN();
  double wall_time_seconds = 0.0;
  std::string error;
};

//! Deterministic per-row seed from the experiment coordinates.
inline std::uint64_t row_seed(std::uint64_t master, const std::string& model, long n,
                              const std::string& method, int replicate) {
  std::uint64_t s = seed_mix(master, model);
  s = seed_mix(s, static_cast<std::uint64_t>(n));
  s = seed_mix(s, method);
  return seed_mix(s, static_cast<std::uint64_t>(replicate));
}

inline int resolve_threads(int requested) {
  if (requested > 0) return requested;
  if (const char* env = std::getenv("DENSELEAF_THREADS")) {
    const int v = std::atoi(env);
    if (v > 0) return v;
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw > 0 ? static_cast<int>(hw) : 1;
}

struct CalibrationResult {
  double c1 = 0.0, c2 = 0.0, c3 = 0.0;
};

//! Calibrates each constant at the sample size its KDE consumes at the
//! reference point: c1 on half-size datasets (the SD kernel half), c2 and
//! c3 on full-size datasets; c3 uses the reference-shape bandwidths.
inline CalibrationResult calibrate_constants(const ExperimentConfig& cfg, int threads) {
  const DensityModel model =
      make_model(cfg.family, cfg.d, cfg.density_seed, cfg.dag_options());
  const KernelSpec kernel = build_order_kernel(cfg.kernel_order);
  const auto& cal = cfg.calibration;

  auto datasets_of = [&](long size, const char* tag) {
    std::vector<Dataset> out;
    for (int i = 0; i < cal.n_datasets; ++i)
      out.push_back(model.sample(static_cast<std::size_t>(size),
                                 seed_mix(seed_mix(cfg.master_seed, tag),
                                          static_cast<std::uint64_t>(i))));
    return out;
  };

  const bool want_sd = std::count(cfg.methods.begin(), cfg.methods.end(), Method::SD);
  const bool want_fd = std::count(cfg.methods.begin(), cfg.methods.end(), Method::FD);
  const bool want_kde = std::count(cfg.methods.begin(), cfg.methods.end(), Method::KDE);

  CalibrationResult result;
  result.c1 = cfg.c1;
  result.c2 = cfg.c2;
  result.c3 = cfg.c3;
  if (want_sd && cfg.c1 == 0.0)
    result.c1 = cv_calibrate(datasets_of(cal.n_cal / 2, "cal-c1"), kernel, cal.grid_lo,
                             cal.grid_hi, cal.grid_step, cal.folds,
                             BandwidthShape::theory(), cfg.master_seed, threads,
                             cal.grid_nodes);
  if (want_fd && cfg.c2 == 0.0)
    result.c2 = cv_calibrate(datasets_of(cal.n_cal, "cal-c2"), kernel, cal.grid_lo,
                             cal.grid_hi, cal.grid_step, cal.folds,
                             BandwidthShape::theory(), cfg.master_seed, threads,
                             cal.grid_nodes);
  if (want_kde && cfg.c3 == 0.0)
    result.c3 = cv_calibrate(datasets_of(cal.n_cal, "cal-c3"), kernel, cal.grid_lo,
                             cal.grid_hi, cal.grid_step, cal.folds,
                             BandwidthShape::reference(cfg.beta_ref), cfg.master_seed,
                             threads, cal.grid_nodes);
  return result;
}

namespace detail {

inline std::string fmt_double(double v) {
  if (std::isnan(v)) return "nan";
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

inline std::string sanitize(std::string s) {
  for (char& c : s)
    if (c == ',' || c == '\n') c = ';';
  return s;
}

}  // namespace detail

inline void write_results_csv(const std::vector<ResultRow>& rows, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path);
  out << "model,d,n,method,replicate,seed,train_error,test_error,zero_baseline,"
         "optimization_gap_proxy,wall_time_seconds,error\n";
  for (const ResultRow& r : rows) {
    out << r.model << ',' << r.d << ',' << r.n << ',' << r.method << ',' << r.replicate
        << ',' << r.seed << ',' << detail::fmt_double(r.train_error) << ','
        << detail::fmt_double(r.test_error) << ',' << detail::fmt_double(r.zero_baseline)
        << ',' << detail::fmt_double(r.optimization_gap_proxy) << ','
        << detail::fmt_double(r.wall_time_seconds) << ',' << detail::sanitize(r.error)
        << "\n";
  }
}

inline std::vector<ResultRow> read_results_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("empty results file: " + path);
  const std::string expected =
      "model,d,n,method,replicate,seed,train_error,test_error,zero_baseline,"
      "optimization_gap_proxy,wall_time_seconds,error";
  if (line != expected) throw std::runtime_error("results file missing columns: " + path);
  std::vector<ResultRow> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string cell;
    std::vector<std::string> cells;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    while (cells.size() < 12) cells.emplace_back();
    ResultRow r;
    r.model = cells[0];
    r.d = std::stoi(cells[1]);
    r.n = std::stol(cells[2]);
    r.method = cells[3];
    r.replicate = std::stoi(cells[4]);
    r.seed = std::stoull(cells[5]);
    r.train_error = std::stod(cells[6]);
    r.test_error = std::stod(cells[7]);
    r.zero_baseline = std::stod(cells[8]);
    r.optimization_gap_proxy = std::stod(cells[9]);
    r.wall_time_seconds = std::stod(cells[10]);
    r.error = cells[11];
    rows.push_back(std::move(r));
  }
  return rows;
}

//! Nearest-rank quantile on a sorted copy.
inline std::vector<double> five_number_summary(std::vector<double> values) {
  std::sort(values.begin(), values.end());
  const std::size_t n = values.size();
  auto rank = [&](double p) {
    const std::size_t r = static_cast<std::size_t>(std::ceil(p * static_cast<double>(n)));
    return values[std::max<std::size_t>(1, std::min(n, r)) - 1];
  };
  return {values.front(), rank(0.25), rank(0.5), rank(0.75), values.back()};
}

//! Runs the full protocol: calibration, one shared training sample per
//! (model, n), per-replicate network fits with distinct initialization
//! seeds, a shared test sample, and persisted results + summary.
inline std::vector<ResultRow> run_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  const int threads = resolve_threads(cfg.threads);
  const DensityModel model =
      make_model(cfg.family, cfg.d, cfg.density_seed, cfg.dag_options());
  const KernelSpec kernel = build_order_kernel(cfg.kernel_order);
  const CalibrationResult constants = calibrate_constants(cfg, threads);

  FitOptions fit_opt;
  fit_opt.F = cfg.F;
  fit_opt.phi_eta = cfg.phi_eta;
  fit_opt.schedule = cfg.schedule;
  fit_opt.fd_leave_one_out = cfg.fd_leave_one_out;

  // Training samples, one per (model, n), generated up front.
  std::map<long, Dataset> train_data;
  for (long n : cfg.sample_sizes)
    train_data.emplace(n, model.sample(static_cast<std::size_t>(n),
                                       seed_mix(seed_mix(cfg.master_seed, "train"),
                                                static_cast<std::uint64_t>(n))));

  struct Task {
    long n = 0;
    Method method = Method::KDE;
    int replicate = 0;
    std::size_t row = 0;
  };
  std::vector<Task> tasks;
  std::vector<ResultRow> rows;
  for (long n : cfg.sample_sizes) {
    for (Method method : cfg.methods) {
      const int reps = (method == Method::KDE) ? 1 : cfg.replicates;
      for (int rep = 0; rep < reps; ++rep) {
        ResultRow row;
        row.model = cfg.family;
        row.d = cfg.d;
        row.n = n;
        row.method = method_name(method);
        row.replicate = rep;
        row.seed = row_seed(cfg.master_seed, cfg.family, n, row.method, rep);
        tasks.push_back({n, method, rep, rows.size()});
        rows.push_back(std::move(row));
      }
    }
  }

  auto run_task = [&](const Task& task) {
    ResultRow& row = rows[task.row];
    const auto start = std::chrono::steady_clock::now();
    try {
      const Dataset* data = &train_data.at(task.n);
      Dataset fresh;
      if (cfg.fresh_sample_per_replicate && task.method != Method::KDE) {
        fresh = model.sample(static_cast<std::size_t>(task.n),
                             seed_mix(row.seed, "fresh"));
        data = &fresh;
      }
      EstimatorHandle handle;
      switch (task.method) {
        case Method::SD:
          handle = fit_sd(*data, kernel, constants.c1, fit_opt, row.seed);
          break;
        case Method::FD:
          handle = fit_fd(*data, kernel, constants.c2, fit_opt, row.seed);
          break;
        case Method::KDE:
          handle = fit_kde_reference(*data, kernel, constants.c3, cfg.beta_ref);
          break;
      }
      const std::uint64_t test_seed = seed_mix(
          seed_mix(cfg.master_seed, "test"), static_cast<std::uint64_t>(task.n));
      const RiskReport rep = evaluate(handle, model, cfg.n_test, test_seed);
      row.train_error = rep.train_error;
      row.test_error = rep.test_error;
      row.zero_baseline = rep.zero_baseline;
    } catch (const std::exception& e) {
      row.error = e.what();
    }
    if (cfg.record_wall_time) {
      row.wall_time_seconds =
          std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    }
  };

  if (threads <= 1 || tasks.size() == 1) {
    for (const Task& t : tasks) run_task(t);
  } else {
    std::atomic<std::size_t> next{0};
    auto worker = [&]() {
      while (true) {
        const std::size_t i = next.fetch_add(1);
        if (i >= tasks.size()) return;
        run_task(tasks[i]);
      }
    };
    std::vector<std::thread> pool;
    for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }

  // Optimization-error proxy: training loss minus the minimum over
  // replicates of the same configuration.
  for (long n : cfg.sample_sizes)
    for (Method method : {Method::SD, Method::FD}) {
      double min_train = std::numeric_limits<double>::infinity();
      for (const ResultRow& r : rows)
        if (r.n == n && r.method == method_name(method) && r.error.empty())
          min_train = std::min(min_train, r.train_error);
      if (!std::isfinite(min_train)) continue;
      for (ResultRow& r : rows)
        if (r.n == n && r.method == method_name(method) && r.error.empty())
          r.optimization_gap_proxy = r.train_error - min_train;
    }

  std::filesystem::create_directories(cfg.output_dir);
  const std::string results_path =
      (std::filesystem::path(cfg.output_dir) / "results.csv").string();
  write_results_csv(rows, results_path);

  // summary.json: model -> d -> n -> method -> five-number summary plus the
  // min-train-error replicate's test error and the zero baseline.
  nlohmann::json summary;
  for (long n : cfg.sample_sizes)
    for (Method method : cfg.methods) {
      std::vector<double> errs;
      double zero = std::numeric_limits<double>::quiet_NaN();
      double best_train = std::numeric_limits<double>::infinity();
      double best_test = std::numeric_limits<double>::quiet_NaN();
      for (const ResultRow& r : rows) {
        if (r.n != n || r.method != method_name(method) || !r.error.empty()) continue;
        errs.push_back(r.test_error);
        zero = r.zero_baseline;
        if (method != Method::KDE && r.train_error < best_train) {
          best_train = r.train_error;
          best_test = r.test_error;
        }
      }
      if (errs.empty()) continue;
      const std::vector<double> q = five_number_summary(errs);
      nlohmann::json entry{{"q0", q[0]}, {"q1", q[1]}, {"q2", q[2]},
                           {"q3", q[3]}, {"q4", q[4]}, {"zero_baseline", zero}};
      if (method == Method::KDE) {
        entry["min_train_test_error"] = nullptr;
      } else {
        entry["min_train_test_error"] = best_test;
      }
      summary[cfg.family][std::to_string(cfg.d)][std::to_string(n)]
             [method_name(method)] = entry;
    }
  std::ofstream sout(std::filesystem::path(cfg.output_dir) / "summary.json");
  sout << summary.dump(2) << "\n";

  return rows;
}

//! Boxplot and scatter data derived from a persisted results file.
inline std::vector<std::string> emit_plot_data(const std::string& results_path,
                                               const std::string& kind) {
  const std::vector<ResultRow> rows = read_results_csv(results_path);
  const std::filesystem::path dir = std::filesystem::path(results_path).parent_path();
  std::vector<std::string> written;

  if (kind == "boxplot") {
    struct Key {
      std::string model;
      int d;
      long n;
      std::string method;
      bool operator<(const Key& o) const {
        return std::tie(model, d, n, method) < std::tie(o.model, o.d, o.n, o.method);
      }
    };
    std::map<Key, std::vector<const ResultRow*>> groups;
    for (const ResultRow& r : rows)
      if (r.error.empty()) groups[{r.model, r.d, r.n, r.method}].push_back(&r);
    const std::string path = (dir / "boxplot.csv").string();
    std::ofstream out(path);
    out << "model,d,n,method,q0,q1,q2,q3,q4,min_train_test_error,zero_baseline\n";
    for (const auto& [key, group] : groups) {
      std::vector<double> errs;
      double best_train = std::numeric_limits<double>::infinity();
      double best_test = std::numeric_limits<double>::quiet_NaN();
      for (const ResultRow* r : group) {
        errs.push_back(r->test_error);
        if (!std::isnan(r->train_error) && r->train_error < best_train) {
          best_train = r->train_error;
          best_test = r->test_error;
        }
      }
      const std::vector<double> q = five_number_summary(errs);
      out << key.model << ',' << key.d << ',' << key.n << ',' << key.method;
      for (double v : q) out << ',' << detail::fmt_double(v);
      out << ',' << detail::fmt_double(best_test) << ','
          << detail::fmt_double(group.front()->zero_baseline) << "\n";
    }
    written.push_back(path);
    return written;
  }
  if (kind == "scatter") {
    const std::string path = (dir / "scatter.csv").string();
    std::ofstream out(path);
    out << "model,d,n,method,replicate,train_error,test_error\n";
    for (const ResultRow& r : rows) {
      if (!r.error.empty() || std::isnan(r.train_error)) continue;
      out << r.model << ',' << r.d << ',' << r.n << ',' << r.method << ','
          << r.replicate << ',' << detail::fmt_double(r.train_error) << ','
          << detail::fmt_double(r.test_error) << "\n";
    }
    written.push_back(path);

    // Least squares test_error ~ train_error per (method, n), by the
    // normal equations.
    const std::string fit_path = (dir / "scatter_fit.csv").string();
    std::ofstream fit(fit_path);
    fit << "model,d,n,method,slope,intercept,count\n";
    std::map<std::tuple<std::string, int, long, std::string>,
             std::vector<std::pair<double, double>>>
        groups;
    for (const ResultRow& r : rows) {
      if (!r.error.empty() || std::isnan(r.train_error)) continue;
      groups[{r.model, r.d, r.n, r.method}].emplace_back(r.train_error, r.test_error);
    }
    for (const auto& [key, pts] : groups) {
      double sx = 0, sy = 0, sxx = 0, sxy = 0;
      for (const auto& [x, y] : pts) {
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
      }
      const double n = static_cast<double>(pts.size());
      const double denom = n * sxx - sx * sx;
      const double slope = denom != 0.0 ? (n * sxy - sx * sy) / denom
                                        : std::numeric_limits<double>::quiet_NaN();
      const double intercept = (sy - slope * sx) / n;
      fit << std::get<0>(key) << ',' << std::get<1>(key) << ',' << std::get<2>(key) << ','
          << std::get<3>(key) << ',' << detail::fmt_double(slope) << ','
          << detail::fmt_double(intercept) << ',' << pts.size() << "\n";
    }
    written.push_back(fit_path);
    return written;
  }
  throw std::invalid_argument("emit_plot_data: unknown kind " + kind);
}

}  // namespace denseleaf
