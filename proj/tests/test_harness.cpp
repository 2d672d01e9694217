#include <catch2/catch_amalgamated.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "denseleaf/harness.hpp"

using namespace denseleaf;

namespace {

ExperimentConfig tiny_config(const std::string& out_dir) {
  ExperimentConfig cfg;
  cfg.family = "NBm";
  cfg.d = 2;
  cfg.density_seed = 5;
  cfg.resolution = 256;
  cfg.sample_sizes = {40};
  cfg.replicates = 2;
  cfg.calibration.n_cal = 40;
  cfg.calibration.n_datasets = 1;
  cfg.calibration.folds = 5;
  cfg.calibration.grid_lo = 0.3;
  cfg.calibration.grid_hi = 0.9;
  cfg.calibration.grid_step = 0.3;
  cfg.calibration.grid_nodes = 33;
  cfg.n_test = 2000;
  cfg.schedule.epochs = 10;
  cfg.master_seed = 99;
  cfg.output_dir = out_dir;
  cfg.record_wall_time = false;
  cfg.threads = 2;
  return cfg;
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("kde-only run emits one row per sample size", "[harness]") {
  const std::string dir = "harness_test_kdeonly";
  ExperimentConfig cfg = tiny_config(dir);
  cfg.methods = {Method::KDE};
  cfg.sample_sizes = {30, 60};
  const auto rows = run_experiment(cfg);
  REQUIRE(rows.size() == 2);
  for (const auto& r : rows) {
    CHECK(r.method == "KDE");
    CHECK(r.error.empty());
    CHECK(std::isnan(r.train_error));
    CHECK(r.test_error >= 0.0);
  }
  std::filesystem::remove_all(dir);
}

TEST_CASE("full run: row count, gap proxy, summary consistency", "[harness][slow]") {
  const std::string dir = "harness_test_full";
  const ExperimentConfig cfg = tiny_config(dir);
  const auto rows = run_experiment(cfg);
  // replicates * |{SD,FD}| + |{KDE}| per sample size
  REQUIRE(rows.size() == 2 * 2 + 1);

  SECTION("row seeds are the documented function of the coordinates") {
    for (const auto& r : rows)
      CHECK(r.seed == row_seed(cfg.master_seed, r.model, r.n, r.method, r.replicate));
  }
  SECTION("gap proxy vanishes at the best replicate and is nonnegative") {
    for (const std::string m : {"SD", "FD"}) {
      double min_gap = 1e300;
      for (const auto& r : rows)
        if (r.method == m) {
          REQUIRE(r.optimization_gap_proxy >= 0.0);
          min_gap = std::min(min_gap, r.optimization_gap_proxy);
        }
      CHECK(min_gap == 0.0);
    }
  }
  SECTION("summary matches an independent scan of results.csv") {
    const auto persisted = read_results_csv(dir + "/results.csv");
    REQUIRE(persisted.size() == rows.size());
    nlohmann::json summary;
    {
      std::ifstream in(dir + "/summary.json");
      in >> summary;
    }
    for (const std::string m : {"SD", "FD"}) {
      double best_train = 1e300, best_test = -1.0;
      std::vector<double> errs;
      for (const auto& r : persisted)
        if (r.method == m) {
          errs.push_back(r.test_error);
          if (r.train_error < best_train) {
            best_train = r.train_error;
            best_test = r.test_error;
          }
        }
      const auto& entry = summary.at("NBm").at("2").at("40").at(m);
      CHECK(entry.at("min_train_test_error").get<double>() == best_test);
      std::sort(errs.begin(), errs.end());
      CHECK(entry.at("q0").get<double>() == errs.front());
      CHECK(entry.at("q4").get<double>() == errs.back());
    }
    CHECK(summary.at("NBm").at("2").at("40").at("KDE").at("min_train_test_error").is_null());
  }
  std::filesystem::remove_all(dir);
}

TEST_CASE("identical config and master seed give byte-identical results", "[harness][slow]") {
  const std::string d1 = "harness_det_a", d2 = "harness_det_b";
  ExperimentConfig cfg = tiny_config(d1);
  run_experiment(cfg);
  cfg.output_dir = d2;
  run_experiment(cfg);
  CHECK(slurp(d1 + "/results.csv") == slurp(d2 + "/results.csv"));
  CHECK(slurp(d1 + "/summary.json") == slurp(d2 + "/summary.json"));
  std::filesystem::remove_all(d1);
  std::filesystem::remove_all(d2);
}

TEST_CASE("failures are recorded per row and the run continues", "[harness][slow]") {
  const std::string dir = "harness_test_err";
  ExperimentConfig cfg = tiny_config(dir);
  cfg.sample_sizes = {41};  // odd: SD/FD reject, KDE still works
  cfg.replicates = 1;
  const auto rows = run_experiment(cfg);
  REQUIRE(rows.size() == 3);
  int failed = 0, ok = 0;
  for (const auto& r : rows) {
    if (r.method == "KDE") {
      CHECK(r.error.empty());
      ++ok;
    } else {
      CHECK_FALSE(r.error.empty());
      ++failed;
    }
  }
  CHECK(ok == 1);
  CHECK(failed == 2);
  // the persisted file survives a round-trip with the error column
  const auto persisted = read_results_csv(dir + "/results.csv");
  REQUIRE(persisted.size() == 3);
  std::filesystem::remove_all(dir);
}

TEST_CASE("five-number summary uses nearest-rank quantiles", "[harness]") {
  // oracle: sort and index by ceil(p n) - 1
  std::vector<double> values{5.0, 1.0, 9.0, 3.0, 7.0, 2.0, 8.0};
  const auto q = five_number_summary(values);
  std::vector<double> s = values;
  std::sort(s.begin(), s.end());
  CHECK(q[0] == s.front());
  CHECK(q[1] == s[static_cast<std::size_t>(std::ceil(0.25 * s.size())) - 1]);
  CHECK(q[2] == s[static_cast<std::size_t>(std::ceil(0.5 * s.size())) - 1]);
  CHECK(q[3] == s[static_cast<std::size_t>(std::ceil(0.75 * s.size())) - 1]);
  CHECK(q[4] == s.back());
}

TEST_CASE("plot data emission", "[harness]") {
  const std::string dir = "harness_test_plots";
  std::filesystem::create_directories(dir);

  SECTION("single row: all five summary numbers equal that row") {
    std::vector<ResultRow> rows(1);
    rows[0].model = "NBm";
    rows[0].d = 2;
    rows[0].n = 40;
    rows[0].method = "SD";
    rows[0].train_error = 0.5;
    rows[0].test_error = 0.7;
    rows[0].zero_baseline = 1.2;
    write_results_csv(rows, dir + "/results.csv");
    emit_plot_data(dir + "/results.csv", "boxplot");
    std::ifstream in(dir + "/boxplot.csv");
    std::string header, line;
    std::getline(in, header);
    std::getline(in, line);
    CHECK(line.find("0.69999999999999996,0.69999999999999996,0.69999999999999996,"
                    "0.69999999999999996,0.69999999999999996") != std::string::npos);
  }
  SECTION("two points give the exact two-point slope") {
    std::vector<ResultRow> rows(2);
    for (int i = 0; i < 2; ++i) {
      rows[i].model = "NBm";
      rows[i].d = 2;
      rows[i].n = 40;
      rows[i].method = "FD";
      rows[i].replicate = i;
    }
    rows[0].train_error = 1.0;
    rows[0].test_error = 2.0;
    rows[1].train_error = 3.0;
    rows[1].test_error = 8.0;
    write_results_csv(rows, dir + "/results.csv");
    emit_plot_data(dir + "/results.csv", "scatter");
    std::ifstream in(dir + "/scatter_fit.csv");
    std::string header, line;
    std::getline(in, header);
    std::getline(in, line);
    // slope (8-2)/(3-1) = 3, intercept 2 - 3*1 = -1
    CHECK(line.find(",FD,3,-1,2") != std::string::npos);
  }
  SECTION("least squares matches the normal equations on synthetic rows") {
    std::vector<ResultRow> rows(100);
    Rng rng(1);
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (int i = 0; i < 100; ++i) {
      rows[i].model = "NBm";
      rows[i].d = 2;
      rows[i].n = 40;
      rows[i].method = "SD";
      rows[i].replicate = i;
      rows[i].train_error = rng.uniform();
      rows[i].test_error = 0.4 * rows[i].train_error + 0.1 + 0.05 * rng.gaussian();
      sx += rows[i].train_error;
      sy += rows[i].test_error;
      sxx += rows[i].train_error * rows[i].train_error;
      sxy += rows[i].train_error * rows[i].test_error;
    }
    const double slope = (100.0 * sxy - sx * sy) / (100.0 * sxx - sx * sx);
    write_results_csv(rows, dir + "/results.csv");
    emit_plot_data(dir + "/results.csv", "scatter");
    std::ifstream in(dir + "/scatter_fit.csv");
    std::string header, line;
    std::getline(in, header);
    std::getline(in, line);
    std::stringstream ss(line);
    std::string cell;
    std::vector<std::string> cells;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    CHECK(std::stod(cells[4]) == Catch::Approx(slope).epsilon(1e-12));
  }
  SECTION("missing columns are rejected") {
    std::ofstream out(dir + "/bad.csv");
    out << "model,n,method\nNBm,40,SD\n";
    out.close();
    CHECK_THROWS_AS(emit_plot_data(dir + "/bad.csv", "boxplot"), std::runtime_error);
  }
  std::filesystem::remove_all(dir);
}

TEST_CASE("config json round trip and validation", "[harness]") {
  const nlohmann::json j = {
      {"model", {{"family", "BTs"}, {"d", 4}, {"seed", 7}, {"resolution", 512}}},
      {"sample_sizes", {100, 200}},
      {"replicates", 3},
      {"methods", {"SD", "KDE"}},
      {"n_test", 5000},
      {"train", {{"epochs", 50}, {"learning_rate", 0.002}}},
      {"master_seed", 42},
      {"record_wall_time", false}};
  const ExperimentConfig cfg = config_from_json(j);
  CHECK(cfg.family == "BTs");
  CHECK(cfg.d == 4);
  CHECK(cfg.resolution == 512);
  CHECK(cfg.sample_sizes == std::vector<long>{100, 200});
  CHECK(cfg.replicates == 3);
  CHECK(cfg.methods == std::vector<Method>{Method::SD, Method::KDE});
  CHECK(cfg.schedule.epochs == 50);
  CHECK(cfg.schedule.learning_rate == 0.002);
  CHECK_FALSE(cfg.record_wall_time);

  nlohmann::json bad = j;
  bad["replicates"] = 0;
  CHECK_THROWS_AS(config_from_json(bad), std::invalid_argument);
  bad = j;
  bad["methods"] = {"XX"};
  CHECK_THROWS_AS(config_from_json(bad), std::invalid_argument);
}

TEST_CASE("calibration stays on the grid", "[harness][slow]") {
  ExperimentConfig cfg = tiny_config("unused");
  cfg.methods = {Method::SD, Method::FD, Method::KDE};
  const CalibrationResult c = calibrate_constants(cfg, 2);
  for (double v : {c.c1, c.c2, c.c3}) {
    CHECK(v >= cfg.calibration.grid_lo - 1e-12);
    CHECK(v <= cfg.calibration.grid_hi + 1e-12);
  }
}

TEST_CASE("thread count does not change the result files", "[harness][slow]") {
  const std::string d1 = "harness_thr_a", d2 = "harness_thr_b";
  ExperimentConfig cfg = tiny_config(d1);
  cfg.threads = 1;
  run_experiment(cfg);
  cfg.threads = 3;
  cfg.output_dir = d2;
  run_experiment(cfg);
  CHECK(slurp(d1 + "/results.csv") == slurp(d2 + "/results.csv"));
  std::filesystem::remove_all(d1);
  std::filesystem::remove_all(d2);
}

TEST_CASE("index rules parse from the config", "[harness]") {
  nlohmann::json j = {{"model",
                       {{"family", "NBs"},
                        {"d", 4},
                        {"rough_rule", "j_divisible_by_3"},
                        {"shifting_rule", "j_minus_1_divisible_by_3"}}}};
  const ExperimentConfig cfg = config_from_json(j);
  CHECK(cfg.rough_rule == DagModelOptions::IndexRule::JDivisibleBy3);
  CHECK(cfg.shifting_rule == DagModelOptions::IndexRule::JMinus1DivisibleBy3);
  j["model"]["rough_rule"] = "sometimes";
  CHECK_THROWS_AS(config_from_json(j), std::invalid_argument);
}
