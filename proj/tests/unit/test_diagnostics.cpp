#include <doctest.h>

#include <chj/diagnostics.hpp>
#include <chj/errors.hpp>
#include <chj/fd_route.hpp>
#include <chj/scenario.hpp>
#include <chj/sl_route.hpp>

#include <cmath>

using namespace chj;

namespace {

MultiplierPath make_path(std::vector<double> times, std::vector<double> values) {
  MultiplierPath p;
  p.times = std::move(times);
  p.values = std::move(values);
  p.residuals.assign(p.values.size(), 0.0);
  p.iterations.assign(p.values.size(), 0);
  return p;
}

BuiltScenario small(const std::string& name, int n_cells = 200) {
  auto cfg = registry_scenario(name);
  cfg.n_cells = n_cells;
  return build_scenario(cfg);
}

}  // namespace

TEST_SUITE("diagnostics") {

TEST_CASE("pessimization") {
  const auto ok = check_pessimization(make_path({0, 1, 2, 3}, {1.0, 1.0, 1.2}), 1e-9);
  CHECK(ok.passed);
  const auto bad = check_pessimization(make_path({0, 1, 2}, {1.0, 0.5}), 1e-9);
  CHECK_FALSE(bad.passed);
  CHECK(bad.witness_value == 1.0);
  CHECK(bad.value == doctest::Approx(0.5));
  CHECK_FALSE(check_pessimization(make_path({0, 1, 2}, {1.0, 0.5}), 1e-9, false).applicable);
}

TEST_CASE("route comparison") {
  const auto q = small("quadratic");
  const auto fd = run_fd(q.problem);
  for (const auto& e : compare_runs(fd, fd)) CHECK_MESSAGE(e.value == 0.0, e.name);

  const auto sl = run_sl(q.problem, q.sl_dt);
  for (const auto& e : compare_runs(fd, sl)) {
    if (e.name == "I_l1") CHECK(e.value <= 5e-2 * q.problem.T);
    CHECK_MESSAGE(e.passed, e.name);
  }

  auto other = small("moving-optimum", 100);
  other.problem.T = q.problem.T;
  other.problem.snapshot_times = q.problem.snapshot_times;
  const auto mo = run_fd(other.problem);
  CHECK_THROWS_AS(compare_runs(fd, mo), ConfigError);
}

TEST_CASE("jump misalignment") {
  CHECK(jump_misalignment({}, {}) == 0.0);
  CHECK(std::isinf(jump_misalignment({Jump{0.2, 1.0, 3}}, {})));
  CHECK(jump_misalignment({Jump{0.2, 1.0, 3}}, {Jump{0.25, 1.0, 4}}) == doctest::Approx(0.05));
}

TEST_CASE("phi weights") {
  const auto q = small("quadratic");
  const auto sl = run_sl(q.problem, q.sl_dt);
  const auto tr = backtrack_trajectory(sl, q.problem.model, q.problem.T, 0.5);
  const auto w = phi_weights(tr, sl.path, sl.path, q.problem.model);
  for (double v : w.values) CHECK(v == doctest::Approx(1.0).epsilon(1e-12));

  const auto k = small("kernel-gaussian");
  const auto ksl = run_sl(k.problem, k.sl_dt);
  const auto ktr = backtrack_trajectory(ksl, k.problem.model, k.problem.T, 0.3);
  const auto kw = phi_weights(ktr, ksl.path, ksl.path, k.problem.model);
  for (std::size_t n = 0; n < kw.s.size(); ++n) {
    const double I = ksl.path.value_at(kw.s[n]);
    const auto k_it = static_cast<std::size_t>(n);
    const double d_I = k.problem.model.lagrangian(I, ktr.positions[k_it + 1], ktr.velocities[k_it]).d_I;
    CHECK(kw.values[n] == doctest::Approx(d_I).epsilon(1e-12));
  }
  CHECK(kw.min > 0.0);
}

TEST_CASE("far-field lower bound") {
  const auto q = small("quadratic");
  const auto fd = run_fd(q.problem);
  const double C = q.truncation.growth_constant;
  CHECK(lower_bound_check(fd, q.problem.g, C).passed);

  RunResult initial = fd;
  initial.snapshots = {fd.snapshots.front()};
  CHECK(initial.snapshots.front().time == 0.0);
  CHECK(lower_bound_check(initial, q.problem.g, 0.0).passed);

  const auto m = small("moving-optimum");
  const auto mfd = run_fd(m.problem);
  CHECK(lower_bound_check(mfd, m.problem.g, m.truncation.growth_constant).passed);
  const auto weak = lower_bound_check(mfd, m.problem.g, 0.0);
  CHECK_FALSE(weak.passed);
  CHECK(weak.witness_time == doctest::Approx(m.problem.T));
  CHECK(std::abs(weak.witness_x - m.truncation.center) >= 0.5);
}

}
