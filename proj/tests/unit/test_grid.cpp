#include <doctest.h>

#include <chj/errors.hpp>
#include <chj/grid.hpp>

#include <cmath>

using namespace chj;

TEST_SUITE("grid") {

TEST_CASE("interpolation") {
  const auto grid = GridSpec::uniform(-1.0, 1.0, 4);
  Field u = Field::sample(grid, [](double x) { return 3.0 * x; });
  for (double x : {-1.0, -0.77, -0.1, 0.0, 0.33, 1.0}) CHECK(interpolate(u, x) == doctest::Approx(3.0 * x));
  CHECK(interpolate(u, grid.node(2)) == u.values[2]);

  Field two{GridSpec::uniform(0.0, 2.0, 2), {0.0, 2.0, 5.0}};
  CHECK(interpolate(two, 0.5) == doctest::Approx(1.0));
  CHECK(interpolate(two, 1.0) == 2.0);
  CHECK_THROWS_AS(interpolate(two, 2.5), DomainError);
}

TEST_CASE("interpolation is monotone in each nodal value") {
  const auto grid = GridSpec::uniform(0.0, 1.0, 5);
  Field u = Field::sample(grid, [](double x) { return std::sin(4 * x); });
  for (std::size_t k = 0; k < u.values.size(); ++k) {
    Field w = u;
    w.values[k] += 0.1;
    for (double x = 0.0; x <= 1.0; x += 0.03) CHECK(interpolate(w, x) >= interpolate(u, x));
  }
}

TEST_CASE("truncation box for the quadratic model") {
  const auto model =
      ModelSpec::quadratic(RateFunction::quadratic_family(1.0, 0.0, 1.0, 0.0, 1.0));
  TruncationParams params;
  const auto g = InitialData::quadratic_well();
  const auto t = truncate_domain(g, model, 1.0, params);
  CHECK(t.center == doctest::Approx(0.0));
  // sup over I >= 0 of max H(I, x, +-1) = 2 - x^2 - I is 2. The box must cover
  // the radius where min{r/2, r^2/4} - C T reaches the margin.
  const double C = 2.0;
  CHECK(t.growth_constant == doctest::Approx(C));
  double r = 0.0;
  while (std::min(r / 2, r * r / 4) - C * 1.0 < params.margin) r += 1e-3;
  CHECK(t.radius >= r - 1e-2);
  CHECK(t.grid.hi - t.center >= r);
  CHECK(t.grid.lo - t.center <= -r);
  const double half = t.grid.hi - t.center;
  CHECK(std::abs(half / params.alignment - std::round(half / params.alignment)) < 1e-9);
}

TEST_CASE("truncation follows the argmin of g") {
  const auto model =
      ModelSpec::quadratic(RateFunction::quadratic_family(1.0, 0.0, 1.0, 0.0, 1.0));
  const auto t = truncate_domain(InitialData::shifted_well(3.0), model, 0.5, {});
  CHECK(t.center == doctest::Approx(3.0));
  CHECK(0.5 * (t.grid.lo + t.grid.hi) == doctest::Approx(3.0));
}

TEST_CASE("truncation is deterministic") {
  const auto model =
      ModelSpec::quadratic(RateFunction::quadratic_family(1.0, 0.0, 1.0, 0.0, 1.0));
  const auto a = truncate_domain(InitialData::soft_well(), model, 0.5, {});
  const auto b = truncate_domain(InitialData::soft_well(), model, 0.5, {});
  CHECK(a.grid == b.grid);
  CHECK(a.radius == b.radius);
}

TEST_CASE("bounded initial data is rejected") {
  const auto model =
      ModelSpec::quadratic(RateFunction::quadratic_family(1.0, 0.0, 1.0, 0.0, 1.0));
  InitialData bounded{"bounded", [](double x) { return 1.0 - std::exp(-x * x); }};
  CHECK_THROWS_AS(truncate_domain(bounded, model, 0.5, {}), ConfigError);
}

}
