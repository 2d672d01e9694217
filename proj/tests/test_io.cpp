#include <catch2/catch_amalgamated.hpp>

#include <cstdlib>
#include <sstream>

#include "denseleaf/dataset.hpp"
#include "denseleaf/densities.hpp"
#include "denseleaf/harness.hpp"

using namespace denseleaf;

TEST_CASE("dataset CSV round-trips at full precision", "[io]") {
  const DensityModel m = make_model("NBm", 3, 55, {256});
  const Dataset data = m.sample(40, 9);
  std::stringstream ss;
  write_csv(data, ss);
  const std::string text = ss.str();
  CHECK(text.rfind("x1,x2,x3\n", 0) == 0);
  std::stringstream in(text);
  const Dataset back = read_csv(in);
  REQUIRE(back.dim == 3);
  REQUIRE(back.points == data.points);
}

TEST_CASE("dataset validation rejects out-of-cube points", "[io]") {
  Dataset bad;
  bad.dim = 2;
  bad.points = {0.5, 1.5};
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  std::stringstream in("x1,x2\n0.5,1.5\n");
  CHECK_THROWS_AS(read_csv(in), std::invalid_argument);
}

TEST_CASE("grid density values export as CSV", "[io]") {
  const GridDensity1D g = make_linear_hj(2, 64);
  std::stringstream ss;
  write_grid_csv(g, ss);
  std::string header;
  std::getline(ss, header);
  CHECK(header == "x,value");
  int rows = 0;
  std::string line;
  while (std::getline(ss, line)) ++rows;
  CHECK(rows == 65);
}

TEST_CASE("thread resolution order: explicit, env, hardware", "[io]") {
  CHECK(resolve_threads(3) == 3);
  setenv("DENSELEAF_THREADS", "5", 1);
  CHECK(resolve_threads(0) == 5);
  setenv("DENSELEAF_THREADS", "bogus", 1);
  CHECK(resolve_threads(0) >= 1);  // falls through to hardware
  unsetenv("DENSELEAF_THREADS");
  CHECK(resolve_threads(0) >= 1);
}
