#include <doctest.h>

#include <chj/errors.hpp>
#include <chj/model.hpp>

#include <cmath>
#include <vector>

using namespace chj;

namespace {

ModelSpec standard_quadratic() {
  return ModelSpec::quadratic(RateFunction::quadratic_family(1.0, 0.0, 1.0, 0.0, 1.0));
}

ModelSpec gaussian_kernel(double amp = 1.0, double width = 1.0) {
  return ModelSpec::kernel(RateFunction::gaussian_bump(amp, width, 1.0, 0.1),
                           RateFunction::affine_in_I(0.0, 1.0), KernelTransform::gaussian(1.0));
}

// Root of p exp(p^2/2) = w by bisection; the left side is increasing.
double kernel_dual_momentum(double w) {
  double lo = -10.0, hi = 10.0;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    (mid * std::exp(0.5 * mid * mid) < w ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

// Observed order of a central difference for one partial derivative.
template <class F>
double observed_order(F f, double analytic, double h) {
  const double e1 = std::abs((f(h) - f(-h)) / (2 * h) - analytic);
  const double e2 = std::abs((f(h / 2) - f(-h / 2)) / h - analytic);
  if (e1 < 1e-10) return 2.0;
  return std::log2(e1 / e2);
}

}  // namespace

TEST_SUITE("model") {

TEST_CASE("hamiltonian values at reference points") {
  const auto b = eval_hamiltonian(standard_quadratic(), 1.0, 0.0, 0.0);
  CHECK(b.value == doctest::Approx(0.0));
  CHECK(b.d_I == doctest::Approx(-1.0));

  const auto flat = ModelSpec::quadratic(RateFunction::quadratic_family(0, 0, 0, 0, 0));
  CHECK(eval_hamiltonian(flat, 0.0, 0.0, 2.0).value == doctest::Approx(4.0));

  const auto unit = ModelSpec::kernel(RateFunction::affine_in_I(1.0, 0.0),
                                      RateFunction::affine_in_I(0.0, 0.0),
                                      KernelTransform::gaussian(1.0));
  CHECK(eval_hamiltonian(unit, 0.0, 0.0, 0.0).value == doctest::Approx(1.0));
}

TEST_CASE("lagrangian values at reference points") {
  const auto flat = ModelSpec::quadratic(RateFunction::quadratic_family(0, 0, 0, 0, 0));
  CHECK(eval_lagrangian(flat, 0.0, 0.0, 2.0).value == doctest::Approx(1.0));
  CHECK(eval_lagrangian(standard_quadratic(), 0.3, 0.4, 0.0).d_pv == doctest::Approx(0.0));
  CHECK(eval_lagrangian(gaussian_kernel(), 0.3, 0.4, 0.0).d_pv == doctest::Approx(0.0));

  const auto unit = ModelSpec::kernel(RateFunction::affine_in_I(1.0, 0.0),
                                      RateFunction::affine_in_I(0.0, 0.0),
                                      KernelTransform::gaussian(1.0));
  const double p = kernel_dual_momentum(1.0);
  const auto L = eval_lagrangian(unit, 0.0, 0.0, 1.0);
  CHECK(L.value == doctest::Approx(p - std::exp(0.5 * p * p)).epsilon(1e-10));
  CHECK(L.d_pv == doctest::Approx(p).epsilon(1e-10));
}

TEST_CASE("out-of-box evaluation names the coordinate") {
  ValidityBox box;
  box.x_lo = -1.0;
  box.x_hi = 1.0;
  const auto m = standard_quadratic().with_validity(box);
  CHECK_THROWS_AS(eval_hamiltonian(m, 0.0, 2.0, 0.0), DomainError);
  try {
    eval_hamiltonian(m, 0.0, 2.0, 0.0);
  } catch (const DomainError& e) {
    CHECK(std::string(e.what()).find('x') != std::string::npos);
  }
}

TEST_CASE("kernel with non-positive birth rate is rejected") {
  const auto bad = ModelSpec::kernel(RateFunction::affine_in_I(-1.0, 0.0),
                                     RateFunction::affine_in_I(0.0, 1.0),
                                     KernelTransform::gaussian(1.0));
  CHECK_THROWS_AS(eval_lagrangian(bad, 0.0, 0.0, 0.5), ModelError);
}

TEST_CASE("reported derivatives converge at second order") {
  const std::vector<ModelSpec> models{
      ModelSpec::quadratic(RateFunction::quadratic_family(1.0, 0.5, 1.0, 0.3, 1.0)),
      gaussian_kernel()};
  const double h = 1e-2;
  for (const auto& m : models) {
    for (double I : {0.2, 1.1}) {
      for (double x : {-0.7, 0.4}) {
        for (double q : {-0.8, 0.3, 1.2}) {
          const auto H = m.hamiltonian(I, x, q);
          CHECK(observed_order([&](double d) { return m.hamiltonian_value(I + d, x, q); }, H.d_I, h) >= 1.8);
          CHECK(observed_order([&](double d) { return m.hamiltonian_value(I, x + d, q); }, H.d_x, h) >= 1.8);
          CHECK(observed_order([&](double d) { return m.hamiltonian_value(I, x, q + d); }, H.d_pv, h) >= 1.8);
          const auto L = m.lagrangian(I, x, q);
          CHECK(observed_order([&](double d) { return m.lagrangian_value(I + d, x, q); }, L.d_I, h) >= 1.8);
          CHECK(observed_order([&](double d) { return m.lagrangian_value(I, x + d, q); }, L.d_x, h) >= 1.8);
          CHECK(observed_order([&](double d) { return m.lagrangian_value(I, x, q + d); }, L.d_pv, h) >= 1.8);
        }
      }
    }
  }
}

TEST_CASE("dual maps are reciprocal") {
  for (const auto& m : {standard_quadratic(), gaussian_kernel()}) {
    for (int k = 0; k < 64; ++k) {
      const double v = -3.0 + 6.0 * k / 63.0;
      const double p = m.momentum(0.5, 0.2, v);
      CHECK(std::abs(m.velocity(0.5, 0.2, p) - v) <= 1e-6);
      CHECK(m.hamiltonian_value(0.5, 0.2, p) + m.lagrangian_value(0.5, 0.2, v) ==
            doctest::Approx(p * v).epsilon(1e-9));
    }
  }
}

TEST_CASE("numeric conjugate of p^2") {
  SampledFunction f;
  for (int i = 0; i <= 1000; ++i) {
    const double p = -5.0 + 0.01 * i;
    f.grid.push_back(p);
    f.values.push_back(p * p);
  }
  std::vector<double> v;
  for (int j = 0; j <= 400; ++j) v.push_back(-4.0 + 0.02 * j);
  const auto c = legendre_conjugate(f, v);
  const double bound = interpolation_error_bound(f);
  for (std::size_t j = 0; j < v.size(); ++j) {
    CHECK(std::abs(c.values[j] - v[j] * v[j] / 4) <= bound * (1 + 1e-9));
  }
}

TEST_CASE("numeric conjugate of |p| vanishes inside the unit ball") {
  SampledFunction f;
  for (int i = 0; i <= 100; ++i) {
    const double p = -5.0 + 0.1 * i;
    f.grid.push_back(p);
    f.values.push_back(std::abs(p));
  }
  const std::vector<double> v{-0.99, -0.5, 0.0, 0.3, 0.99};
  for (double c : legendre_conjugate(f, v).values) CHECK(c == doctest::Approx(0.0));
}

TEST_CASE("double conjugate recovers interior samples") {
  SampledFunction f;
  for (int i = 0; i <= 200; ++i) {
    const double p = -5.0 + 0.05 * i;
    f.grid.push_back(p);
    f.values.push_back(std::cosh(p));
  }
  std::vector<double> v;
  for (int j = 0; j <= 2000; ++j) v.push_back(-75.0 + 0.075 * j);
  const auto once = legendre_conjugate(f, v);
  const auto twice = legendre_conjugate(once, f.grid);
  const double bound = 2.0 * std::max(interpolation_error_bound(f), interpolation_error_bound(once));
  for (std::size_t i = 0; i < f.grid.size(); ++i) {
    if (std::abs(f.grid[i]) > 4.0) continue;
    CHECK(std::abs(twice.values[i] - f.values[i]) <= bound);
  }
}

TEST_CASE("non-convex samples are rejected") {
  SampledFunction f{{0.0, 1.0, 2.0, 3.0}, {0.0, 1.0, 1.5, 1.6}};
  CHECK_THROWS_AS(legendre_conjugate(f, std::vector<double>{0.0}), ConvexityError);
}

TEST_CASE("assumption checks") {
  AssumptionBox box;
  box.lattice = 16;
  const auto good = check_assumptions(standard_quadratic(), box);
  for (const char* name : {"H1", "H2", "L1", "L2", "L3", "L4", "L5"}) {
    REQUIRE(good.find(name) != nullptr);
    CHECK_MESSAGE(good.find(name)->passed, name);
  }
  CHECK_FALSE(good.hard_failure());

  const auto flat_in_I =
      ModelSpec::quadratic(RateFunction::quadratic_family(1.0, 0.0, 1.0, 0.0, 0.0));
  const auto bad = check_assumptions(flat_in_I, box);
  REQUIRE(bad.find("L2") != nullptr);
  CHECK_FALSE(bad.find("L2")->passed);
  CHECK(bad.find("L2")->worst == doctest::Approx(0.0));
  CHECK(bad.hard_failure());

  const auto kernel = check_assumptions(gaussian_kernel(), box);
  CHECK(kernel.all_passed());
  REQUIRE(kernel.find("DL") != nullptr);
  CHECK(kernel.find("DL")->applicable);
}

}
