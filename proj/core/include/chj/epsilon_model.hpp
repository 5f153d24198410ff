#pragma once

// The viscous selection-mutation model in Hopf-Cole variables,
//   u_t + R(I, x) + |u_x|^2 = eps u_xx,   I(t) = int psi exp(-u / eps) dx,
// where the multiplier emerges from the state instead of being imposed.

#include <functional>
#include <string>
#include <vector>

#include "chj/grid.hpp"
#include "chj/model.hpp"
#include "chj/multiplier.hpp"

namespace chj {

using Weight = std::function<double(double)>;

/// Explicit update with a local Lax-Friedrichs gradient term and Neumann
/// ghost nodes. Requires a quadratic model (ModelError otherwise) and
/// dt <= min(0.4 h / max|d_p H|, 0.4 h^2 / (2 eps)) (StepSizeError).
Field eps_step(const Field& u, double I, double eps, double dt, const ModelSpec& model);

/// Largest explicit step allowed for u at this eps.
double eps_stable_dt(const Field& u, double eps);

/// Trapezoidal int psi exp(-u/eps), evaluated with the exponent shifted by
/// min u. Throws BlowUpError if the result overflows.
double compute_I_eps(const Field& u, const Weight& psi, double eps);

struct EpsRunResult {
  double eps = 0.0;
  std::vector<Field> snapshots;
  MultiplierPath path;          ///< I_eps used on each step
  std::vector<double> min_u;    ///< min u_eps at every step boundary
  std::vector<double> mass;     ///< int psi n_eps at every step boundary

  double sup_abs_min() const;
};

/// Explicit coupling: I from the current field drives the step.
EpsRunResult run_eps(const Problem& problem, double eps, const Weight& psi);

struct ConvergenceRow {
  double eps = 0.0;
  double l1_I = 0.0;        ///< ||I_eps - I||_{L1(0.1 T, T)}
  double sup_min_u = 0.0;   ///< sup_t |min u_eps|
  double linf_u = 0.0;      ///< sup over shared snapshots of ||u_eps - u|| on the core box
  double order_I = 0.0;     ///< observed order against the previous row (NaN on the first)
  double order_u = 0.0;
};

/// One row per eps. The core box is the grid centre +- core_radius.
/// Throws ConfigError on an empty list.
std::vector<ConvergenceRow> convergence_table(const Problem& problem,
                                              const std::vector<double>& eps_list,
                                              const RunResult& reference,
                                              const Weight& psi,
                                              double core_radius = 1.0,
                                              std::vector<EpsRunResult>* runs = nullptr);

}  // namespace chj
