#pragma once

// Semi-Lagrangian dynamic programming for the variational solution
//   u(t, x) = min_v { dt L(I, x, v) + u(t - dt, x - dt v) },
// with trajectory backtracking and the diagnostics that use it.

#include <memory>
#include <span>
#include <string>
#include <vector>

#include "chj/grid.hpp"
#include "chj/model.hpp"
#include "chj/multiplier.hpp"

namespace chj {

/// exact: minimizes over all feet in the velocity window on the
/// piecewise-linear interpolant (per cell: stationary point or an end).
/// node_lattice: feet restricted to grid nodes, v = (x - x_j) / dt.
enum class SlSearch { exact, node_lattice };

std::string to_string(SlSearch search);
SlSearch parse_sl_search(const std::string& name);

struct SlChoice {
  double value = 0.0;
  double velocity = 0.0;
  double foot = 0.0;
};

/// The one-point minimization. Feet are restricted to the grid and to
/// |v| <= v_max; ties go to smaller |v|, then smaller v. Throws
/// DomainTooSmallError if no foot is admissible.
SlChoice sl_minimize(const Field& u, const ModelSpec& model, double I, double x,
                     double dt, double v_max, SlSearch search = SlSearch::exact);

struct SlStepOutput {
  Field u;
  ArgminMap map;
};

SlStepOutput sl_step(const Field& u, double I, double dt, const ModelSpec& model,
                     double v_max, SlSearch search = SlSearch::exact);

/// Twice the largest |d_p H(I, x, s)| over grid x, I in the bracket and the
/// slopes s of u. Every optimal velocity is d_p H at some cell slope, so the
/// search window never binds on an exact minimizer.
double velocity_bound(const ModelSpec& model, const Field& u, const Bracket& bracket);

class SlStepper final : public Stepper {
 public:
  SlStepper(const ModelSpec& model, const Field& u, double dt, double v_max,
            SlSearch search)
      : model_(model), u_(u), dt_(dt), v_max_(v_max), search_(search) {}

  const GridSpec& grid() const override { return u_.grid; }
  void evaluate(double I, std::span<const std::size_t> nodes,
                std::span<double> out) const override;

  ArgminMap argmin_map(double I) const;
  double v_max() const { return v_max_; }

 private:
  const ModelSpec& model_;
  const Field& u_;
  double dt_;
  double v_max_;
  SlSearch search_;
};

class SlRoute final : public Route {
 public:
  /// v_max <= 0 selects velocity_bound() per step.
  explicit SlRoute(double dt, double v_max = 0.0, SlSearch search = SlSearch::exact)
      : dt_(dt), v_max_(v_max), search_(search) {}

  std::string name() const override { return "sl"; }
  double choose_dt(const Problem&, const Field&, double) const override { return dt_; }
  std::unique_ptr<Stepper> make_stepper(const Problem& problem, const Field& u,
                                        double dt) const override;
  void on_start(const Problem& problem, const Field& u, RunResult& run) const override;
  void on_accept(const Problem& problem, const Stepper& stepper, double I,
                 double t_start, const Field& next, RunResult& run) const override;

 private:
  double dt_;
  double v_max_;
  SlSearch search_;
};

RunResult run_sl(const Problem& problem, double dt, SlSearch search = SlSearch::exact);

struct Trajectory {
  std::vector<double> times;       ///< s_0 = 0 < ... < s_K = t
  std::vector<double> positions;   ///< gamma(s_k)
  std::vector<double> velocities;  ///< on (s_k, s_{k+1})
  std::vector<double> multipliers; ///< I on (s_k, s_{k+1})
  double action = 0.0;
  double value = 0.0;              ///< u(t, x) from the run
  double bv_of_velocity = 0.0;

  double t() const { return times.back(); }
  double endpoint() const { return positions.back(); }
};

/// Follows the characteristics of a semi-Lagrangian run backwards from
/// (t, x), both snapped to the run's step boundaries and grid. Each velocity
/// solves v = d_p H(I, y, Du(y - dt v)) with Du the interpolated centred
/// gradient of the stored field; if that iteration stalls, the one-point
/// minimization is used instead.
Trajectory backtrack_trajectory(const RunResult& run, const ModelSpec& model,
                                double t, double x);

/// Sup over interior intervals of
///   (d_v L(k+1) - d_v L(k)) / ds - d_x L(k),
/// skipping intervals adjacent to flagged multiplier increments.
double euler_lagrange_residual(const Trajectory& traj, const MultiplierPath& path,
                               const ModelSpec& model);

/// Sum of |a_{k+1} - a_k|.
double bv_seminorm(std::span<const double> samples);

}  // namespace chj
