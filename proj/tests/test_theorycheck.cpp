#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "denseleaf/theorycheck.hpp"

using namespace denseleaf;

TEST_CASE("poissonization: full-range set is trivially satisfied", "[theorycheck]") {
  const CheckReport rep = check_poissonization(
      5, BoundedStatistic::half_box_indicator(1), ThresholdSet::everything(), 10000, 7);
  CHECK(rep.lhs == 1.0);
  CHECK(rep.rhs >= 1.0);  // sqrt(2 e pi n) >= 1
  CHECK(rep.pass);
  CHECK(rep.pass == (rep.lhs <= rep.rhs + rep.slack));
}

TEST_CASE("poissonization: analytic n=5 instance", "[theorycheck][slow]") {
  // h = 1{x <= 1/2}, A = {count >= 5}, uniform draws.
  // LHS exact: P(Bin(5, 1/2) = 5) = 2^-5. RHS exact: P(Pois(2.5) >= 5).
  const long trials = 40000;
  const CheckReport rep = check_poissonization(
      5, BoundedStatistic::half_box_indicator(1), ThresholdSet::at_least(5.0), trials, 11);
  const double exact_lhs = std::pow(0.5, 5);
  double pois_cdf4 = 0.0, term = std::exp(-2.5);
  for (int k = 0; k <= 4; ++k) {
    pois_cdf4 += term;
    term *= 2.5 / (k + 1);
  }
  const double exact_rhs = 1.0 - pois_cdf4;
  const double se_l = std::sqrt(exact_lhs * (1 - exact_lhs) / trials);
  const double se_r = std::sqrt(exact_rhs * (1 - exact_rhs) / trials);
  CHECK(std::abs(rep.lhs - exact_lhs) <= 4.0 * se_l);
  const double factor = std::sqrt(2.0 * std::exp(1.0) * 3.141592653589793 * 5.0);
  CHECK(std::abs(rep.rhs - factor * exact_rhs) <= 4.0 * factor * se_r);
  CHECK(rep.pass);
  CHECK_FALSE(rep.inconclusive);
}

TEST_CASE("poissonization: verdict is stable across trial counts", "[theorycheck][slow]") {
  const CheckReport a = check_poissonization(
      5, BoundedStatistic::half_box_indicator(1), ThresholdSet::at_least(5.0), 10000, 21);
  const CheckReport b = check_poissonization(
      5, BoundedStatistic::half_box_indicator(1), ThresholdSet::at_least(5.0), 100000, 22);
  CHECK(a.pass == b.pass);
}

TEST_CASE("poissonization preconditions", "[theorycheck]") {
  CHECK_THROWS_AS(check_poissonization(5, BoundedStatistic::half_box_indicator(1),
                                       ThresholdSet::everything(), 100, 1),
                  std::invalid_argument);
}

TEST_CASE("bias bound: hand value of the bound", "[theorycheck]") {
  // F=1, d=1, beta=1, box kernel, h=1/4: bound = 0.25 * 1 * 0.5 * 1 = 0.125
  const KernelSpec box = build_order_kernel(0);
  GridDensity1D flat;
  flat.support_hi = 1.0;
  flat.values.assign(65, 1.0);
  flat.normalize();
  DensityModel uniform;
  uniform.model = flat;
  uniform.tag = "uniform";
  const CheckReport rep = check_bias_bound(uniform, 1.0, 1.0, box, 0.25, {{0.5}});
  CHECK(rep.rhs == Catch::Approx(0.125).margin(1e-14));
  // locally constant density: zero bias in the interior
  CHECK(rep.lhs <= 1e-10);
  CHECK(rep.pass);
}

TEST_CASE("bias bound passes on the linear product truth", "[theorycheck][slow]") {
  for (int d : {1, 2}) {
    const DeclaredTruth truth = make_linear_product_truth(d);
    const KernelSpec box = build_order_kernel(0);
    for (int e = 2; e <= 6; ++e) {
      const double h = std::ldexp(1.0, -e);
      std::vector<std::vector<double>> probes;
      for (double base : {0.3, 0.5, 0.62}) probes.push_back(std::vector<double>(d, base));
      const CheckReport rep = check_bias_bound(truth.model, truth.beta, truth.F, box, h, probes);
      INFO("d=" << d << " h=2^-" << e);
      CHECK(rep.pass);
    }
  }
}

TEST_CASE("bias bound halving property", "[theorycheck][slow]") {
  // For a smooth truth the measured bias at h/2 stays within 2^beta times
  // the measured bias at h (up to quadrature noise), matching the rate in
  // the bound.
  GridDensity1D smooth;
  smooth.support_hi = 1.0;
  smooth.values.resize(257);
  for (int i = 0; i <= 256; ++i) {
    const double x = i / 256.0;
    smooth.values[i] = 1.0 + 0.5 * (x - 0.5) * (x - 0.5);
  }
  smooth.normalize();
  DensityModel truth;
  truth.model = smooth;
  const KernelSpec box = build_order_kernel(0);
  const double x = 0.5;
  const double b1 = std::abs(detail::conditional_bias_at(truth, box, 0.125, &x));
  const double b2 = std::abs(detail::conditional_bias_at(truth, box, 0.0625, &x));
  CHECK(b2 <= b1);  // shrinking h never inflates the bias here
}

TEST_CASE("bias bound rejects mismatched kernel order", "[theorycheck]") {
  const DeclaredTruth truth = make_linear_product_truth(1);
  CHECK_THROWS_AS(
      check_bias_bound(truth.model, 1.0, truth.F, build_order_kernel(3), 0.25, {{0.5}}),
      std::invalid_argument);
}

TEST_CASE("noise variance bound", "[theorycheck][slow]") {
  // Bound value: F=1, d=1, box kernel -> 65 * 4 * (1/4) = 65.
  const KernelSpec box = build_order_kernel(0);
  GridDensity1D flat;
  flat.support_hi = 1.0;
  flat.values.assign(65, 1.0);
  flat.normalize();
  DensityModel uniform;
  uniform.model = flat;
  const CheckReport rep = check_noise_variance(uniform, 1.0, box, 0.25, 10000, 31);
  CHECK(rep.rhs == Catch::Approx(65.0).margin(1e-10));
  CHECK(rep.pass);
  SECTION("two seeds agree within 6 standard errors") {
    const CheckReport a = check_noise_variance(uniform, 1.0, box, 0.25, 10000, 32);
    CHECK(std::abs(a.lhs - rep.lhs) <= 6.0 * (a.slack / 3.0 + rep.slack / 3.0));
  }
  SECTION("single kernel point stays bounded") {
    const CheckReport one = check_noise_variance(uniform, 1.0, box, 0.25, 10000, 33, 1);
    CHECK(std::isfinite(one.lhs));
    CHECK(one.pass);
  }
}

TEST_CASE("reports are self-consistent and serialize", "[theorycheck]") {
  const CheckReport rep = check_poissonization(
      3, BoundedStatistic::half_box_indicator(1), ThresholdSet::at_least(1.0), 10000, 41);
  CHECK(rep.pass == (rep.lhs <= rep.rhs + rep.slack));
  const nlohmann::json j = rep.to_json();
  CHECK(j.at("name").get<std::string>() == rep.name);
  CHECK(j.at("pass").get<bool>() == rep.pass);
}

TEST_CASE("floor convention: largest integer strictly below", "[theorycheck]") {
  CHECK(floor_strict(1.0) == 0);
  CHECK(floor_strict(1.5) == 1);
  CHECK(floor_strict(2.0) == 1);
  CHECK(floor_strict(0.5) == 0);
}
