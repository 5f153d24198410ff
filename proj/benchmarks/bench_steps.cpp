#include <benchmark/benchmark.h>

#include <chj/fd_route.hpp>
#include <chj/model.hpp>
#include <chj/multiplier.hpp>
#include <chj/scenario.hpp>
#include <chj/sl_route.hpp>

#include <cmath>
#include <vector>

using namespace chj;

namespace {

struct Setup {
  ModelSpec model;
  InitialData g;
  Field u;

  explicit Setup(int n_cells)
      : model(build_model(registry_scenario("jump"))),
        g(build_initial_data(registry_scenario("jump"))),
        u(Field::sample(GridSpec::uniform(-4.0, 4.0, n_cells), g)) {}
};

void BM_fd_step(benchmark::State& state) {
  const Setup s(static_cast<int>(state.range(0)));
  const auto nh = make_numerical_hamiltonian(FdScheme::upwind_convex, s.model, s.u, {0.0, 10.0});
  const auto bo = BoundaryOffsets::from(s.g, s.u.grid);
  const double dt = 0.2 * s.u.grid.h() / 10.0;
  for (auto _ : state) benchmark::DoNotOptimize(fd_step(s.u, 2.0, dt, s.model, nh, bo));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_fd_step)->Arg(400)->Arg(800)->Arg(1600);

void BM_sl_step(benchmark::State& state) {
  const Setup s(static_cast<int>(state.range(0)));
  const double vmax = velocity_bound(s.model, s.u, {0.0, 10.0});
  for (auto _ : state) benchmark::DoNotOptimize(sl_step(s.u, 2.0, 1.25e-3, s.model, vmax));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_sl_step)->Arg(400)->Arg(800)->Arg(1600);

void BM_multiplier_step_fd(benchmark::State& state) {
  const Setup s(static_cast<int>(state.range(0)));
  const auto nh = make_numerical_hamiltonian(FdScheme::upwind_convex, s.model, s.u, {0.0, 10.0});
  const FdStepper stepper(s.model, s.u, 0.2 * s.u.grid.h() / 10.0, nh,
                          BoundaryOffsets::from(s.g, s.u.grid));
  for (auto _ : state) benchmark::DoNotOptimize(solve_multiplier_step(stepper, {}));
}
BENCHMARK(BM_multiplier_step_fd)->Arg(800);

void BM_multiplier_step_sl(benchmark::State& state) {
  const Setup s(static_cast<int>(state.range(0)));
  const SlStepper stepper(s.model, s.u, 1.25e-3, velocity_bound(s.model, s.u, {0.0, 10.0}),
                          SlSearch::exact);
  for (auto _ : state) benchmark::DoNotOptimize(solve_multiplier_step(stepper, {}));
}
BENCHMARK(BM_multiplier_step_sl)->Arg(800);

void BM_legendre_conjugate(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  SampledFunction f;
  std::vector<double> v;
  for (std::size_t i = 0; i < n; ++i) {
    const double p = -5.0 + 10.0 * static_cast<double>(i) / static_cast<double>(n - 1);
    f.grid.push_back(p);
    f.values.push_back(std::exp(0.5 * p * p));
    v.push_back(-20.0 + 40.0 * static_cast<double>(i) / static_cast<double>(n - 1));
  }
  for (auto _ : state) benchmark::DoNotOptimize(legendre_conjugate(f, v));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_legendre_conjugate)->RangeMultiplier(2)->Range(256, 4096)->Complexity(benchmark::oNSquared);

}  // namespace
BENCHMARK_MAIN();
