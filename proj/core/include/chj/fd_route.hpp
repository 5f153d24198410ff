#pragma once

// Monotone finite-difference stepping for u_t + H(I, x, u_x) = 0.

#include <initializer_list>
#include <memory>
#include <string>
#include <vector>

#include "chj/grid.hpp"
#include "chj/model.hpp"
#include "chj/multiplier.hpp"

namespace chj {

enum class FdScheme { lax_friedrichs, upwind_convex };

std::string to_string(FdScheme scheme);
FdScheme parse_fd_scheme(const std::string& name);

/// Two-point numerical Hamiltonian H^(I, x, p-, p+), non-decreasing in p-
/// and non-increasing in p+.
struct NumericalHamiltonian {
  FdScheme scheme = FdScheme::upwind_convex;
  double alpha = 0.0;  ///< Lax-Friedrichs dissipation

  double operator()(const ModelSpec& model, double I, double x, double p_minus,
                    double p_plus) const;
};

/// One-sided differences at interior nodes; entries 0 and n are unused.
struct OneSidedGradients {
  std::vector<double> minus;
  std::vector<double> plus;
  double lo = 0.0;  ///< smallest one-sided difference over the grid
  double hi = 0.0;  ///< largest
};

OneSidedGradients one_sided_gradients(const Field& u);

/// max |d_p H| over x on the grid, p in [p_lo, p_hi], I in `Is`. Exact for
/// convex H because |d_p H| is maximal at an end of the momentum interval.
double max_characteristic_speed(const ModelSpec& model, const GridSpec& grid,
                                double p_lo, double p_hi,
                                std::initializer_list<double> Is);

/// Builds the numerical Hamiltonian for a field. The LF coefficient covers the
/// gradient range padded by 10% and every I in the bracket.
NumericalHamiltonian make_numerical_hamiltonian(FdScheme scheme,
                                                const ModelSpec& model,
                                                const Field& u,
                                                const Bracket& bracket);

/// Boundary rule: each end node follows its neighbour plus the increment of
/// the initial data, u+(x_0) = u+(x_1) + g(x_0) - g(x_1).
struct BoundaryOffsets {
  double left = 0.0;
  double right = 0.0;

  static BoundaryOffsets from(const InitialData& g, const GridSpec& grid);
};

/// u - dt * H^(I, x, D-u, D+u) at interior nodes, boundary rule at the ends.
/// Throws StepSizeError if dt * max|d_p H| > h over the local gradient
/// interval, BlowUpError naming the node on a non-finite value.
Field fd_step(const Field& u, double I, double dt, const ModelSpec& model,
              const NumericalHamiltonian& nh, const BoundaryOffsets& boundary);

class FdStepper final : public Stepper {
 public:
  FdStepper(const ModelSpec& model, const Field& u, double dt,
            NumericalHamiltonian nh, BoundaryOffsets boundary);

  const GridSpec& grid() const override { return u_.grid; }
  void evaluate(double I, std::span<const std::size_t> nodes,
                std::span<double> out) const override;

 private:
  double interior(double I, std::size_t i) const;

  const ModelSpec& model_;
  const Field& u_;
  double dt_;
  NumericalHamiltonian nh_;
  BoundaryOffsets boundary_;
  OneSidedGradients grad_;
};

class FdRoute final : public Route {
 public:
  explicit FdRoute(FdScheme scheme = FdScheme::upwind_convex, double cfl = 0.4,
                   double dt_floor = 1e-6)
      : scheme_(scheme), cfl_(cfl), dt_floor_(dt_floor) {}

  std::string name() const override { return "fd"; }
  double choose_dt(const Problem& problem, const Field& u,
                   double I_prev) const override;
  std::unique_ptr<Stepper> make_stepper(const Problem& problem, const Field& u,
                                        double dt) const override;

 private:
  FdScheme scheme_;
  double cfl_;
  double dt_floor_;
};

RunResult run_fd(const Problem& problem, FdScheme scheme = FdScheme::upwind_convex);

}  // namespace chj
