#pragma once

// Checks over finished runs: monotonicity of the multiplier, cross-run
// agreement, positivity of the averaged I-derivative of L along a
// trajectory, and the far-field lower bound on u.

#include <string>
#include <vector>

#include "chj/grid.hpp"
#include "chj/model.hpp"
#include "chj/multiplier.hpp"
#include "chj/sl_route.hpp"

namespace chj {

struct DiagnosticEntry {
  std::string name;
  bool applicable = true;
  bool passed = true;
  double value = 0.0;       ///< measured quantity
  double tolerance = 0.0;
  double witness_time = 0.0;
  double witness_x = 0.0;
  double witness_value = 0.0;
  std::string note;
};

struct DiagnosticsReport {
  std::vector<DiagnosticEntry> entries;

  void add(DiagnosticEntry e) { entries.push_back(std::move(e)); }
  /// Not-applicable entries count as passing.
  bool all_passed() const;
  const DiagnosticEntry* find(const std::string& name) const;
};

/// Passes iff I_{n+1} >= I_n - tol for every n. Marked not applicable when
/// the model does not satisfy L(I, x, v) >= L(I, x, 0).
DiagnosticEntry check_pessimization(const MultiplierPath& path, double tol,
                                    bool symmetric_lagrangian = true);

struct CompareOptions {
  double l1_per_T = 5e-2;     ///< L1 tolerance as a fraction of T
  double u_tolerance = 5e-2;
  double core_radius = 1.0;   ///< half-width of the comparison box about the grid centre
  double jump_floor = 1e-6;
};

/// Entries "I_l1", "u_sup" and "jump_alignment". Throws ConfigError when the
/// runs belong to different scenarios or horizons.
std::vector<DiagnosticEntry> compare_runs(const RunResult& a, const RunResult& b,
                                          const CompareOptions& options = {});

/// Largest distance from a jump of one path to the nearest jump of the
/// other (infinite if exactly one of them has jumps).
double jump_misalignment(const std::vector<Jump>& a, const std::vector<Jump>& b);

struct PhiWeights {
  std::vector<double> s;       ///< interval midpoints
  std::vector<double> values;
  double min = 0.0;
};

/// phi(s) = int_0^1 d_I L((1 - th) I1(s) + th I2(s), gamma(s), gamma'(s)) dth by
/// 16-point Gauss-Legendre, one sample per trajectory interval.
PhiWeights phi_weights(const Trajectory& traj, const MultiplierPath& I1,
                       const MultiplierPath& I2, const ModelSpec& model);

/// Passes iff u(t, x) >= min{|x - o|/2, min_{|x'-o| >= |x-o|/2} g} - C t - tol at
/// every snapshot node, with o the argmin of g.
DiagnosticEntry lower_bound_check(const RunResult& run, const InitialData& g, double C,
                                  double tol = 1e-8);

}  // namespace chj
