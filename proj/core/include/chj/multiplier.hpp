#pragma once

// The constraint engine. Given a one-step evolution u -> u+(I) that is
// non-decreasing in I at every node, find the multiplier I with
// min_x u+(I) = 0, and drive the time loop shared by the PDE routes.

#include <cstddef>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "chj/grid.hpp"
#include "chj/model.hpp"

namespace chj {

/// One-step operator parameterized by the multiplier.
class Stepper {
 public:
  virtual ~Stepper() = default;

  virtual const GridSpec& grid() const = 0;
  /// Writes u+(I) at `nodes` into `out` (same length).
  virtual void evaluate(double I, std::span<const std::size_t> nodes,
                        std::span<double> out) const = 0;

  /// u+(I) at every node.
  std::vector<double> evaluate_all(double I) const;
};

struct Bracket {
  double lo = 0.0;
  double hi = 10.0;
};

struct MultiplierOptions {
  Bracket bracket;
  double tol_constraint = 1e-8;
  double bracket_width = 1e-10;
  int max_expansions = 12;
  bool allow_negative = false;
};

struct MultiplierStep {
  double I = 0.0;
  std::vector<double> u_next;
  int iterations = 0;
  double residual = 0.0;  ///< min_x u_next
  Bracket bracket_used;
};

/// Bisection to `bracket_width` with candidate-node pruning (a node whose
/// value at the lower end already exceeds the minimum at the upper end can
/// never attain the minimum), then one secant polish.
MultiplierStep solve_multiplier_step(const Stepper& stepper,
                                     const MultiplierOptions& options);

/// Per-step constraint-engine record.
struct StepRecord {
  double time = 0.0;  ///< end of the step
  double dt = 0.0;
  double I = 0.0;
  double min_before = 0.0;
  double min_after = 0.0;
  double argmin_x = 0.0;
  Bracket bracket;
  int iterations = 0;
};

/// Piecewise-constant multiplier: values[n] holds on (times[n], times[n+1]].
struct MultiplierPath {
  std::vector<double> times;  ///< step boundaries t_0 = 0 < t_1 < ... < t_n
  std::vector<double> values;
  std::vector<double> residuals;
  std::vector<int> iterations;

  std::size_t size() const { return values.size(); }
  double start() const { return times.empty() ? 0.0 : times.front(); }
  double end() const { return times.empty() ? 0.0 : times.back(); }
  /// Right-continuous step value at t in (t_0, t_n]; t <= t_0 returns the
  /// first value (the right limit at the origin).
  double value_at(double t) const;
  /// Total variation over steps ending at or before t.
  double bv(double t) const;
  double bv() const { return bv(end()); }
  double max_dt() const;
  double midpoint(std::size_t n) const { return 0.5 * (times[n] + times[n + 1]); }
  /// Path restricted to (0, t] with t a step boundary (nearest boundary used).
  MultiplierPath truncated(double t) const;
};

/// Integral of |a - b| over (t0, t1] for two right-continuous step paths.
double l1_distance(const MultiplierPath& a, const MultiplierPath& b, double t0,
                   double t1);

struct Jump {
  double time = 0.0;  ///< boundary at which the largest increment occurs
  double size = 0.0;
  std::size_t index = 0;
};

/// Increments above max(10 x median non-negligible |dI|, floor) are flagged;
/// flagged increments on consecutive steps are merged into one jump.
std::vector<Jump> detect_jumps(const MultiplierPath& path, double floor = 1e-6);

/// flags[k] is true when values[k+1] - values[k] is a flagged increment.
std::vector<bool> flag_increments(const MultiplierPath& path, double floor = 1e-6);

/// Snapshot of the SL minimization at one step.
struct ArgminMap {
  double time = 0.0;  ///< start of the step
  double dt = 0.0;
  double I = 0.0;
  std::vector<double> velocity;
  std::vector<double> foot;
  std::size_t saturated = 0;  ///< nodes with |v*| == V_max
};

struct RunResult {
  std::string route;
  std::string scenario;
  GridSpec grid;
  double T = 0.0;
  std::vector<Field> snapshots;
  MultiplierPath path;
  std::vector<StepRecord> steps;
  // Semi-Lagrangian runs only.
  std::vector<ArgminMap> argmin_maps;
  std::vector<Field> history;  ///< u at every step boundary
  double velocity_bound = 0.0;
  std::size_t saturation_count = 0;

  const Field* snapshot_at(double t, double tol = 1e-12) const;
};

/// Everything a route needs to evolve one scenario.
struct Problem {
  std::string name;
  ModelSpec model;
  InitialData g;
  GridSpec grid;
  double T = 1.0;
  std::vector<double> snapshot_times;
  MultiplierOptions multiplier;
  int boundary_cells = 5;  ///< argmin must stay this many cells inside
};

/// Route = a way of producing steppers for the shared time loop.
class Route {
 public:
  virtual ~Route() = default;
  virtual std::string name() const = 0;
  /// Step size from the current field and the previous multiplier.
  virtual double choose_dt(const Problem& problem, const Field& u,
                           double I_prev) const = 0;
  virtual std::unique_ptr<Stepper> make_stepper(const Problem& problem,
                                                const Field& u,
                                                double dt) const = 0;
  /// Hook after a step is accepted (the SL route stores argmin maps).
  virtual void on_accept(const Problem&, const Stepper&, double /*I*/,
                         double /*t_start*/, const Field& /*next*/,
                         RunResult&) const {}
  virtual void on_start(const Problem&, const Field&, RunResult&) const {}
};

/// Shared time loop. Errors propagate with route and time context.
RunResult run(const Problem& problem, const Route& route);

/// Initial field with min g = 0 enforced by the recorded shift of g.
Field initial_field(const Problem& problem);

}  // namespace chj
