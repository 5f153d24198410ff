#pragma once

// Scenario configuration, the built-in registry, and run orchestration.

#include <optional>
#include <string>
#include <vector>

#include "chj/diagnostics.hpp"
#include "chj/epsilon_model.hpp"
#include "chj/grid.hpp"
#include "chj/model.hpp"
#include "chj/multiplier.hpp"

namespace chj {

struct ScenarioConfig {
  std::string name;
  std::string scenario;  ///< registry entry the defaults came from, if any

  // model
  std::string model = "quadratic";  ///< quadratic | kernel | tabulated
  // R = r0 + r1 x - r2 (x - x0)^2 - c_I I  (quadratic and tabulated)
  double r0 = 1.0, r1 = 0.0, r2 = 1.0, x0 = 0.0, c_I = 1.0;
  // B = b_amp exp(-b_width x^2) exp(-b_decay I) + b_floor,  D = d0 + d_I I
  double b_amp = 1.0, b_width = 1.0, b_decay = 1.0, b_floor = 0.1;
  double d0 = 0.0, d_I = 1.0;
  double sigma = 1.0;
  std::string profile;  ///< momentum profile table (tabulated)
  double theta_coeff = 0.0, c_theta = 0.0;

  // initial data
  std::string g = "quadratic-well";
  double g_center = 0.0, g_scale = 1.0;
  double g_left = -1.0, g_right = 1.0, g_offset = 0.2;
  std::string g_table;
  double g_lift = 0.0;  ///< constant added to g before normalization

  // weight in the viscous route
  double psi = 1.0;
  std::string psi_table;

  double T = 0.5;
  int n_cells = 800;
  std::optional<double> domain_lo, domain_hi;
  double margin = 1.0;
  double safety = 1.0;

  std::vector<std::string> routes{"fd", "sl"};
  std::string fd_scheme = "upwind_convex";
  std::optional<double> sl_dt;  ///< default T/400 at 800 cells, scaled with the grid
  std::string sl_search = "exact";
  std::vector<double> eps_list{0.1, 0.05, 0.025};

  double tol_constraint = 1e-8;
  double bracket_width = 1e-10;
  double tol_dual = 1e-6;
  std::optional<double> tol_action;  ///< default 5 (dt + h)
  double I_min = 0.0, I_max = 10.0;
  bool allow_negative = false;

  std::string output = "out";
  std::vector<double> snapshots;  ///< default: T/5, 2T/5, ..., T
  int trajectories = 21;
  double core_radius = 1.0;
  int check_lattice = 64;
};

/// `key = value` lines, `#` comments. `scenario = <name>` loads registry
/// defaults before the other keys apply. Unknown keys, malformed values and
/// invalid settings throw ConfigError naming the key and line.
ScenarioConfig parse_config(const std::string& text);
ScenarioConfig load_config(const std::string& path);

/// Built-in scenarios: quadratic, moving-optimum, jump, kernel-gaussian.
ScenarioConfig registry_scenario(const std::string& name);
std::vector<std::string> registry_names();

ModelSpec build_model(const ScenarioConfig& config);
InitialData build_initial_data(const ScenarioConfig& config);
Weight build_psi(const ScenarioConfig& config);

struct BuiltScenario {
  Problem problem;
  TruncationResult truncation;
  double sl_dt = 0.0;
  double g_shift = 0.0;  ///< subtracted from g so that min g = 0 on the grid
  double tol_action = 0.0;
  Weight psi;
};

/// Truncates the domain at the configured cell count, then scales the cell
/// count and the SL step by `refine` on the same bounds.
BuiltScenario build_scenario(const ScenarioConfig& config, double refine = 1.0);

struct RunOptions {
  std::optional<std::string> output;
  double refine = 1.0;
  std::vector<std::string> routes;  ///< empty: the config's list
  int verbosity = 0;
};

struct ScenarioOutcome {
  int exit_code = 0;
  std::string report_path;
  DiagnosticsReport diagnostics;
  std::vector<RunResult> runs;
  std::vector<std::string> errors;
};

/// Runs the routes, diagnostics and cross-route comparison and writes all
/// artifacts under the output directory. Non-zero exit iff a diagnostic
/// fails or a route errors.
ScenarioOutcome run_scenario(const ScenarioConfig& config, const RunOptions& options = {});

}  // namespace chj
