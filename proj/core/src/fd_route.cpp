#include "chj/fd_route.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <fmt/format.h>

#include "chj/errors.hpp"

namespace chj {

std::string to_string(FdScheme scheme) {
  return scheme == FdScheme::lax_friedrichs ? "lax_friedrichs" : "upwind_convex";
}

FdScheme parse_fd_scheme(const std::string& name) {
  if (name == "lax_friedrichs" || name == "lf") return FdScheme::lax_friedrichs;
  if (name == "upwind_convex" || name == "godunov") return FdScheme::upwind_convex;
  throw ConfigError(fmt::format("unknown finite-difference scheme '{}'", name));
}

double NumericalHamiltonian::operator()(const ModelSpec& model, double I, double x,
                                        double p_minus, double p_plus) const {
  if (scheme == FdScheme::lax_friedrichs) {
    return model.hamiltonian_value(I, x, 0.5 * (p_minus + p_plus)) -
           0.5 * alpha * (p_plus - p_minus);
  }
  // Godunov for convex H: min over [p-, p+] if ordered, max over [p+, p-] otherwise.
  if (p_minus <= p_plus) {
    const double p0 = std::clamp(model.hamiltonian_argmin(I, x), p_minus, p_plus);
    return model.hamiltonian_value(I, x, p0);
  }
  return std::max(model.hamiltonian_value(I, x, p_minus),
                  model.hamiltonian_value(I, x, p_plus));
}

OneSidedGradients one_sided_gradients(const Field& u) {
  const std::size_t n = u.grid.n_nodes();
  const double h = u.grid.h();
  OneSidedGradients g;
  g.minus.assign(n, 0.0);
  g.plus.assign(n, 0.0);
  g.lo = std::numeric_limits<double>::infinity();
  g.hi = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 1; i + 1 < n; ++i) {
    g.minus[i] = (u.values[i] - u.values[i - 1]) / h;
    g.plus[i] = (u.values[i + 1] - u.values[i]) / h;
    g.lo = std::min({g.lo, g.minus[i], g.plus[i]});
    g.hi = std::max({g.hi, g.minus[i], g.plus[i]});
  }
  if (n < 3) g.lo = g.hi = 0.0;
  return g;
}

double max_characteristic_speed(const ModelSpec& model, const GridSpec& grid,
                                double p_lo, double p_hi,
                                std::initializer_list<double> Is) {
  double m = 0.0;
  for (double I : Is) {
    for (std::size_t i = 0; i < grid.n_nodes(); ++i) {
      const double x = grid.node(i);
      m = std::max({m, std::abs(model.velocity(I, x, p_lo)),
                    std::abs(model.velocity(I, x, p_hi))});
    }
  }
  return m;
}

NumericalHamiltonian make_numerical_hamiltonian(FdScheme scheme,
                                                const ModelSpec& model,
                                                const Field& u,
                                                const Bracket& bracket) {
  NumericalHamiltonian nh;
  nh.scheme = scheme;
  if (scheme == FdScheme::lax_friedrichs) {
    const auto g = one_sided_gradients(u);
    const double pad = 0.1 * std::max(g.hi - g.lo, 1e-3);
    nh.alpha = 1.1 * max_characteristic_speed(model, u.grid, g.lo - pad, g.hi + pad,
                                              {bracket.lo, bracket.hi});
  }
  return nh;
}

BoundaryOffsets BoundaryOffsets::from(const InitialData& g, const GridSpec& grid) {
  const std::size_t n = grid.n_nodes();
  return {g(grid.node(0)) - g(grid.node(1)), g(grid.node(n - 1)) - g(grid.node(n - 2))};
}

// ---------------------------------------------------------------------------

FdStepper::FdStepper(const ModelSpec& model, const Field& u, double dt,
                     NumericalHamiltonian nh, BoundaryOffsets boundary)
    : model_(model), u_(u), dt_(dt), nh_(nh), boundary_(boundary),
      grad_(one_sided_gradients(u)) {}

double FdStepper::interior(double I, std::size_t i) const {
  const double x = u_.grid.node(i);
  const double pm = grad_.minus[i];
  const double pp = grad_.plus[i];
  const double speed = nh_.scheme == FdScheme::lax_friedrichs
                           ? nh_.alpha
                           : std::max(std::abs(model_.velocity(I, x, pm)),
                                      std::abs(model_.velocity(I, x, pp)));
  if (dt_ * speed > u_.grid.h()) {
    throw StepSizeError(fmt::format(
        "CFL violated at node {} (x = {}): dt * |d_p H| = {} exceeds h = {}", i, x,
        dt_ * speed, u_.grid.h()));
  }
  const double v = u_.values[i] - dt_ * nh_(model_, I, x, pm, pp);
  if (!std::isfinite(v)) {
    throw BlowUpError(fmt::format("non-finite value at node {} (x = {}, I = {})", i, x, I));
  }
  return v;
}

void FdStepper::evaluate(double I, std::span<const std::size_t> nodes,
                         std::span<double> out) const {
  const std::size_t last = u_.grid.n_nodes() - 1;
  for (std::size_t k = 0; k < nodes.size(); ++k) {
    const std::size_t i = nodes[k];
    if (i == 0) {
      out[k] = interior(I, 1) + boundary_.left;
    } else if (i == last) {
      out[k] = interior(I, last - 1) + boundary_.right;
    } else {
      out[k] = interior(I, i);
    }
  }
}

Field fd_step(const Field& u, double I, double dt, const ModelSpec& model,
              const NumericalHamiltonian& nh, const BoundaryOffsets& boundary) {
  FdStepper s(model, u, dt, nh, boundary);
  return Field{u.grid, s.evaluate_all(I), u.time + dt};
}

// ---------------------------------------------------------------------------

double FdRoute::choose_dt(const Problem& problem, const Field& u, double I_prev) const {
  double speed = 0.0;
  if (scheme_ == FdScheme::lax_friedrichs) {
    speed = make_numerical_hamiltonian(scheme_, problem.model, u, problem.multiplier.bracket)
                .alpha;
  } else {
    // The root-find sweeps I across the bracket, so the local CFL must hold
    // at its ends as well as at the previous multiplier.
    const auto g = one_sided_gradients(u);
    const auto& b = problem.multiplier.bracket;
    for (std::size_t i = 1; i + 1 < u.grid.n_nodes(); ++i) {
      const double x = u.grid.node(i);
      for (double I : {I_prev, b.lo, b.hi}) {
        speed = std::max({speed, std::abs(problem.model.velocity(I, x, g.minus[i])),
                          std::abs(problem.model.velocity(I, x, g.plus[i]))});
      }
    }
  }
  if (!(speed > 0.0)) return std::max(problem.T, dt_floor_);
  return std::max(cfl_ * u.grid.h() / speed, dt_floor_);
}

std::unique_ptr<Stepper> FdRoute::make_stepper(const Problem& problem, const Field& u,
                                               double dt) const {
  return std::make_unique<FdStepper>(
      problem.model, u, dt,
      make_numerical_hamiltonian(scheme_, problem.model, u, problem.multiplier.bracket),
      BoundaryOffsets::from(problem.g, problem.grid));
}

RunResult run_fd(const Problem& problem, FdScheme scheme) {
  return run(problem, FdRoute(scheme));
}

}  // namespace chj
