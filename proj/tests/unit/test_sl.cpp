#include <doctest.h>

#include <chj/errors.hpp>
#include <chj/fd_route.hpp>
#include <chj/scenario.hpp>
#include <chj/sl_route.hpp>

#include <cmath>
#include <limits>
#include <vector>

using namespace chj;

namespace {

ModelSpec zero_growth() {
  return ModelSpec::quadratic(RateFunction::quadratic_family(0, 0, 0, 0, 0));
}

}  // namespace

TEST_SUITE("sl_route") {

TEST_CASE("zero field stays zero") {
  const auto grid = GridSpec::uniform(-1.0, 1.0, 10);
  const Field u = Field::sample(grid, [](double) { return 0.0; });
  const auto out = sl_step(u, 0.0, 0.1, zero_growth(), 5.0);
  for (double v : out.u.values) CHECK(v == doctest::Approx(0.0));
  for (double v : out.map.velocity) CHECK(v == 0.0);
}

TEST_CASE("node lattice matches exhaustive enumeration on three nodes") {
  const auto grid = GridSpec::uniform(-1.0, 1.0, 2);
  const auto model = ModelSpec::quadratic(RateFunction::quadratic_family(0.5, 0.2, 0, 0, 1));
  const Field u{grid, {0.3, 0.0, 0.05}};
  const double dt = 0.5, I = 0.4;
  const auto out = sl_step(u, I, dt, model, 100.0, SlSearch::node_lattice);
  for (std::size_t i = 0; i < 3; ++i) {
    const double x = grid.node(i);
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < 3; ++j) {
      const double v = (x - grid.node(j)) / dt;
      best = std::min(best, dt * (v * v / 4 - (0.5 + 0.2 * x - I)) + u.values[j]);
    }
    CHECK(out.u.values[i] == doctest::Approx(best).epsilon(1e-14));
  }
}

TEST_CASE("exact search matches dense sampling of the interpolant") {
  const auto grid = GridSpec::uniform(-2.0, 2.0, 16);
  const auto model = build_model(registry_scenario("kernel-gaussian"));
  const Field u = Field::sample(grid, [](double x) { return std::abs(x - 0.3) + 0.2 * std::sin(3 * x); });
  const double dt = 0.2, I = 0.5;
  for (double x : {-1.5, -0.25, 0.0, 0.75, 1.75}) {
    const auto c = sl_minimize(u, model, I, x, dt, 50.0);
    double best = std::numeric_limits<double>::infinity();
    for (int k = 0; k <= 400000; ++k) {
      const double y = -2.0 + 4.0 * k / 400000.0;
      best = std::min(best, dt * model.lagrangian_value(I, x, (x - y) / dt) + interpolate(u, y));
    }
    CHECK(c.value <= best + 1e-12);
    CHECK(c.value >= best - 1e-6);
    CHECK(c.foot == doctest::Approx(x - dt * c.velocity));
  }
}

TEST_CASE("bv seminorm") {
  CHECK(bv_seminorm(std::vector<double>{2.0, 2.0, 2.0}) == 0.0);
  CHECK(bv_seminorm(std::vector<double>{-1.0, 0.0, 0.5, 3.0}) == doctest::Approx(4.0));
  CHECK(bv_seminorm(std::vector<double>{0.0, 1.0, 0.0, 1.0}) == doctest::Approx(3.0));
}

TEST_CASE("backtracking in the quadratic scenario") {
  auto cfg = registry_scenario("quadratic");
  cfg.n_cells = 200;
  const auto built = build_scenario(cfg);
  const auto run = run_sl(built.problem, built.sl_dt);

  const auto tr = backtrack_trajectory(run, built.problem.model, cfg.T, 0.0);
  for (double y : tr.positions) CHECK(std::abs(y) <= 1e-12);
  CHECK(std::abs(tr.action) <= 1e-9);
  CHECK(tr.value == doctest::Approx(0.0).epsilon(1e-9));
  CHECK(euler_lagrange_residual(tr, run.path, built.problem.model) == doctest::Approx(0.0));

  const auto off = backtrack_trajectory(run, built.problem.model, cfg.T, 0.6);
  CHECK(std::abs(off.action - off.value) <= built.tol_action);

  const auto first = backtrack_trajectory(run, built.problem.model, run.path.times[1], 0.0);
  REQUIRE(first.velocities.size() == 1);
  CHECK(first.action == doctest::Approx(built.sl_dt * built.problem.model.lagrangian_value(1.0, 0.0, 0.0)).epsilon(1e-6));
}

TEST_CASE("perturbed trajectories have a larger residual") {
  auto cfg = registry_scenario("moving-optimum");
  cfg.n_cells = 200;
  const auto built = build_scenario(cfg);
  const auto run = run_sl(built.problem, built.sl_dt);
  const auto tr = backtrack_trajectory(run, built.problem.model, cfg.T, 0.8);
  Trajectory saw = tr;
  for (std::size_t k = 0; k < saw.velocities.size(); ++k) saw.velocities[k] += (k % 2 ? 0.2 : -0.2);
  const double base = euler_lagrange_residual(tr, run.path, built.problem.model);
  CHECK(euler_lagrange_residual(saw, run.path, built.problem.model) > base);
}

TEST_CASE("backtracking needs stored argmin maps") {
  auto cfg = registry_scenario("quadratic");
  cfg.n_cells = 100;
  const auto built = build_scenario(cfg);
  const auto fd = run_fd(built.problem);
  CHECK_THROWS_AS(backtrack_trajectory(fd, built.problem.model, cfg.T, 0.0), UnsupportedRunError);
}

TEST_CASE("empty velocity window") {
  const auto grid = GridSpec::uniform(0.0, 1.0, 4);
  const Field u = Field::sample(grid, [](double x) { return x; });
  CHECK_THROWS_AS(sl_minimize(u, zero_growth(), 0.0, 5.0, 0.1, 1.0), DomainTooSmallError);
}

}
