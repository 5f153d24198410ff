#include <doctest.h>

#include <chj/errors.hpp>
#include <chj/fd_route.hpp>
#include <chj/multiplier.hpp>
#include <chj/scenario.hpp>
#include <chj/sl_route.hpp>

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

using namespace chj;

namespace {

// u+(I)_i = base_i + slope * I.
class AffineStepper final : public Stepper {
 public:
  AffineStepper(std::vector<double> base, double slope)
      : grid_(GridSpec::uniform(0.0, 1.0, static_cast<int>(base.size()) - 1)),
        base_(std::move(base)),
        slope_(slope) {}

  const GridSpec& grid() const override { return grid_; }
  void evaluate(double I, std::span<const std::size_t> nodes,
                std::span<double> out) const override {
    for (std::size_t k = 0; k < nodes.size(); ++k) out[k] = base_[nodes[k]] + slope_ * I;
  }

 private:
  GridSpec grid_;
  std::vector<double> base_;
  double slope_;
};

MultiplierPath make_path(std::vector<double> times, std::vector<double> values) {
  MultiplierPath p;
  p.times = std::move(times);
  p.values = std::move(values);
  p.residuals.assign(p.values.size(), 0.0);
  p.iterations.assign(p.values.size(), 0);
  return p;
}

}  // namespace

TEST_SUITE("multiplier") {

TEST_CASE("affine stepper root") {
  const AffineStepper s({0.7, -2.5, 0.1, 3.0}, 1.0);
  const auto r = solve_multiplier_step(s, {});
  CHECK(r.I == doctest::Approx(2.5).epsilon(1e-9));
  CHECK(std::abs(r.residual) <= 1e-8);
  CHECK(*std::min_element(r.u_next.begin(), r.u_next.end()) == doctest::Approx(0.0).epsilon(1e-8));
}

TEST_CASE("bracket expands upwards") {
  const AffineStepper s({-25.0, 1.0, 2.0}, 1.0);
  CHECK(solve_multiplier_step(s, {}).I == doctest::Approx(25.0).epsilon(1e-9));
}

TEST_CASE("flat stepper never yields a silent answer") {
  CHECK_THROWS_AS(solve_multiplier_step(AffineStepper({1.0, 2.0, 3.0}, 0.0), {}), InfeasibleError);
  CHECK_THROWS_AS(solve_multiplier_step(AffineStepper({-1.0, 2.0, 3.0}, 0.0), {}), InfeasibleError);
  try {
    solve_multiplier_step(AffineStepper({1.0, 2.0, 3.0}, 0.0), {});
  } catch (const InfeasibleError& e) {
    CHECK(e.cause() == InfeasibleError::Cause::decay_too_strong);
  }
}

TEST_CASE("negative multipliers only when allowed") {
  const AffineStepper s({1.5, 2.0, 3.0}, 1.0);
  CHECK_THROWS_AS(solve_multiplier_step(s, {}), InfeasibleError);
  MultiplierOptions o;
  o.allow_negative = true;
  CHECK(solve_multiplier_step(s, o).I == doctest::Approx(-1.5).epsilon(1e-9));
}

TEST_CASE("path conventions") {
  const auto p = make_path({0.0, 0.1, 0.2, 0.3}, {1.0, 2.0, 1.5});
  CHECK(p.value_at(0.0) == 1.0);
  CHECK(p.value_at(0.1) == 1.0);
  CHECK(p.value_at(0.1000001) == 2.0);
  CHECK(p.value_at(0.3) == 1.5);
  CHECK(p.bv() == doctest::Approx(1.5));
  CHECK(p.max_dt() == doctest::Approx(0.1));

  const auto q = make_path({0.0, 0.15, 0.3}, {1.0, 2.0});
  // |p - q| is 0 on (0, 0.1], 1 on (0.1, 0.15], 0 on (0.15, 0.2], 0.5 on (0.2, 0.3].
  CHECK(l1_distance(p, q, 0.0, 0.3) == doctest::Approx(0.1));
  CHECK(l1_distance(p, p, 0.0, 0.3) == 0.0);
}

TEST_CASE("jump detection merges consecutive increments") {
  std::vector<double> t, v;
  for (int n = 0; n <= 100; ++n) t.push_back(0.01 * n);
  for (int n = 0; n < 100; ++n) v.push_back(1.0 + 1e-3 * n + (n >= 40 ? 0.3 : 0.0) + (n >= 41 ? 0.2 : 0.0));
  const auto jumps = detect_jumps(make_path(t, v));
  REQUIRE(jumps.size() == 1);
  CHECK(jumps[0].time == doctest::Approx(0.40));
  CHECK(jumps[0].size == doctest::Approx(0.502));
}

TEST_CASE("quadratic scenario keeps the multiplier at one") {
  const auto built = build_scenario(registry_scenario("quadratic"));
  const auto run = run_fd(built.problem);
  for (double I : run.path.values) CHECK(std::abs(I - 1.0) <= 1e-2);
  for (double r : run.path.residuals) CHECK(std::abs(r) <= built.problem.multiplier.tol_constraint);
}

TEST_CASE("zero horizon returns the initial field") {
  auto cfg = registry_scenario("quadratic");
  cfg.T = 0.0;
  auto cfg2 = cfg;
  cfg2.g_lift = 0.4;
  for (const auto& c : {cfg, cfg2}) {
    const auto built = build_scenario(c);
    const auto run = run_fd(built.problem);
    CHECK(run.path.size() == 0);
    REQUIRE_FALSE(run.snapshots.empty());
    CHECK(run.snapshots.back().time == 0.0);
    CHECK(run.snapshots.back().min() == doctest::Approx(0.0));
  }
}

TEST_CASE("runs are deterministic") {
  auto cfg = registry_scenario("jump");
  cfg.n_cells = 200;
  const auto built = build_scenario(cfg);
  const auto a = run_fd(built.problem);
  const auto b = run_fd(built.problem);
  CHECK(a.path.times == b.path.times);
  CHECK(a.path.values == b.path.values);
}

TEST_CASE("steppers are increasing in the multiplier") {
  const auto model = build_model(registry_scenario("moving-optimum"));
  const auto grid = GridSpec::uniform(-2.0, 2.0, 31);
  const auto g = InitialData::quadratic_well();
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  for (int trial = 0; trial < 50; ++trial) {
    const Field u = Field::sample(grid, [&](double x) { return x * x + 0.2 * U(rng); });
    const double I = 3.0 * U(rng);
    const double d = 1e-3 + 0.1 * U(rng);
    const auto nh = make_numerical_hamiltonian(FdScheme::upwind_convex, model, u, {0.0, 10.0});
    const auto bo = BoundaryOffsets::from(g, grid);
    const FdStepper fd(model, u, 1e-3, nh, bo);
    const SlStepper sl(model, u, 1e-2, velocity_bound(model, u, {0.0, 10.0}), SlSearch::exact);
    for (const Stepper* s : {static_cast<const Stepper*>(&fd), static_cast<const Stepper*>(&sl)}) {
      const auto a = s->evaluate_all(I);
      const auto b = s->evaluate_all(I + d);
      CHECK(*std::min_element(b.begin(), b.end()) > *std::min_element(a.begin(), a.end()));
    }
  }
}

}
