#include <doctest.h>

#include <chj/errors.hpp>
#include <chj/fd_route.hpp>
#include <chj/scenario.hpp>

#include <cmath>
#include <limits>

using namespace chj;

TEST_SUITE("fd_route") {

TEST_CASE("constant field is stationary without growth") {
  const auto model = ModelSpec::quadratic(RateFunction::quadratic_family(0, 0, 0, 0, 0));
  const auto grid = GridSpec::uniform(-1.0, 1.0, 8);
  const Field u = Field::sample(grid, [](double) { return 0.25; });
  const InitialData flat{"flat", [](double) { return 0.0; }};
  for (auto scheme : {FdScheme::lax_friedrichs, FdScheme::upwind_convex}) {
    const auto nh = make_numerical_hamiltonian(scheme, model, u, {0.0, 1.0});
    const auto next = fd_step(u, 0.5, 0.1, model, nh, BoundaryOffsets::from(flat, grid));
    for (double v : next.values) CHECK(v == doctest::Approx(0.25));
  }
}

TEST_CASE("five-node Lax-Friedrichs update") {
  const auto model = ModelSpec::quadratic(RateFunction::quadratic_family(-1, 0, 0, 0, 0));
  const auto grid = GridSpec::uniform(-1.0, 1.0, 4);
  const auto g = InitialData{"abs", [](double x) { return std::abs(x); }};
  const Field u = Field::sample(grid, g);
  const NumericalHamiltonian nh{FdScheme::lax_friedrichs, 2.2};
  const double dt = 0.05;
  const auto next = fd_step(u, 0.0, dt, model, nh, BoundaryOffsets::from(g, grid));
  // Interior: D-u = D+u = -1 (left), -1 | +1 (centre), +1 (right).
  // H^ = -1 + mid^2 - 1.1 (D+ - D-): 0, -3.2, 0.
  const double expected[] = {1.0, 0.5, dt * 3.2, 0.5, 1.0};
  for (std::size_t i = 0; i < 5; ++i) CHECK(next.values[i] == doctest::Approx(expected[i]).epsilon(1e-14));
}

TEST_CASE("Godunov flux on a convex Hamiltonian") {
  const auto model = ModelSpec::quadratic(RateFunction::quadratic_family(0, 0, 0, 0, 0));
  const NumericalHamiltonian nh{FdScheme::upwind_convex, 0.0};
  CHECK(nh(model, 0, 0, -1.0, 2.0) == doctest::Approx(0.0));   // 0 in [p-, p+]
  CHECK(nh(model, 0, 0, 0.5, 2.0) == doctest::Approx(0.25));   // min at p-
  CHECK(nh(model, 0, 0, 1.0, -3.0) == doctest::Approx(9.0));   // max of the ends
  CHECK(to_string(parse_fd_scheme("lf")) == to_string(FdScheme::lax_friedrichs));
  CHECK_THROWS(parse_fd_scheme("weno"));
}

TEST_CASE("numerical Hamiltonian is monotone in the stencil") {
  const auto model = build_model(registry_scenario("kernel-gaussian"));
  const auto grid = GridSpec::uniform(-1.0, 1.0, 8);
  const Field u = Field::sample(grid, [](double x) { return x * x; });
  for (auto scheme : {FdScheme::lax_friedrichs, FdScheme::upwind_convex}) {
    const auto nh = make_numerical_hamiltonian(scheme, model, u, {0.0, 2.0});
    for (double pm = -2.0; pm <= 2.0; pm += 0.25) {
      for (double pp = -2.0; pp <= 2.0; pp += 0.25) {
        const double base = nh(model, 1.0, 0.3, pm, pp);
        CHECK(nh(model, 1.0, 0.3, pm + 0.05, pp) >= base - 1e-12);
        CHECK(nh(model, 1.0, 0.3, pm, pp + 0.05) <= base + 1e-12);
      }
    }
  }
}

TEST_CASE("stability violations") {
  const auto model = ModelSpec::quadratic(RateFunction::quadratic_family(0, 0, 0, 0, 0));
  const auto grid = GridSpec::uniform(-1.0, 1.0, 4);
  const Field u = Field::sample(grid, [](double x) { return 4.0 * x * x; });
  const auto nh = make_numerical_hamiltonian(FdScheme::upwind_convex, model, u, {0.0, 1.0});
  const auto bo = BoundaryOffsets::from(InitialData::quadratic_well(), grid);
  CHECK_THROWS_AS(fd_step(u, 0.0, 1.0, model, nh, bo), StepSizeError);

  Field bad = u;
  bad.values[2] = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(fd_step(bad, 0.0, 1e-3, model, nh, bo), BlowUpError);
}

TEST_CASE("moving optimum drives the multiplier up") {
  auto cfg = registry_scenario("moving-optimum");
  cfg.n_cells = 400;
  const auto run = run_fd(build_scenario(cfg).problem);
  CHECK(run.path.values.front() == doctest::Approx(1.0).epsilon(0.05));
  for (std::size_t n = 1; n < run.path.size(); ++n) {
    CHECK(run.path.values[n] >= run.path.values[n - 1] - 1e-9);
  }
  CHECK(run.path.values.back() > 1.5);
}

}
