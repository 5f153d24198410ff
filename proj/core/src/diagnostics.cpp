#include "chj/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <boost/math/quadrature/gauss.hpp>
#include <fmt/format.h>

#include "chj/errors.hpp"

namespace chj {

bool DiagnosticsReport::all_passed() const {
  return std::all_of(entries.begin(), entries.end(),
                     [](const DiagnosticEntry& e) { return !e.applicable || e.passed; });
}

const DiagnosticEntry* DiagnosticsReport::find(const std::string& name) const {
  for (const auto& e : entries) {
    if (e.name == name) return &e;
  }
  return nullptr;
}

DiagnosticEntry check_pessimization(const MultiplierPath& path, double tol,
                                    bool symmetric_lagrangian) {
  DiagnosticEntry e;
  e.name = "pessimization";
  e.tolerance = tol;
  if (!symmetric_lagrangian) {
    e.applicable = false;
    e.note = "model fails L(I,x,v) >= L(I,x,0); monotonicity of I is not expected";
    return e;
  }
  double worst = 0.0;
  for (std::size_t n = 1; n < path.values.size(); ++n) {
    const double drop = path.values[n - 1] - path.values[n];
    if (drop > worst) {
      worst = drop;
      e.witness_time = path.times[n];
      e.witness_value = static_cast<double>(n);
    }
  }
  e.value = worst;
  e.passed = worst <= tol;
  if (!e.passed) e.note = fmt::format("I decreases by {} at step {}", worst, e.witness_value);
  return e;
}

double jump_misalignment(const std::vector<Jump>& a, const std::vector<Jump>& b) {
  if (a.empty() && b.empty()) return 0.0;
  if (a.empty() || b.empty()) return std::numeric_limits<double>::infinity();
  double worst = 0.0;
  auto one_way = [&](const std::vector<Jump>& p, const std::vector<Jump>& q) {
    for (const auto& j : p) {
      double d = std::numeric_limits<double>::infinity();
      for (const auto& k : q) d = std::min(d, std::abs(j.time - k.time));
      worst = std::max(worst, d);
    }
  };
  one_way(a, b);
  one_way(b, a);
  return worst;
}

std::vector<DiagnosticEntry> compare_runs(const RunResult& a, const RunResult& b,
                                          const CompareOptions& options) {
  if (a.scenario != b.scenario || std::abs(a.T - b.T) > 1e-12) {
    throw ConfigError(fmt::format(
        "cannot compare runs of different scenarios: '{}' (T = {}) vs '{}' (T = {})",
        a.scenario, a.T, b.scenario, b.T));
  }
  const double T = a.T;
  std::vector<DiagnosticEntry> out;

  DiagnosticEntry l1;
  l1.name = "I_l1";
  l1.value = l1_distance(a.path, b.path, 0.0, T);
  l1.tolerance = options.l1_per_T * T;
  l1.passed = l1.value <= l1.tolerance;
  l1.note = fmt::format("{} vs {}", a.route, b.route);
  out.push_back(l1);

  DiagnosticEntry us;
  us.name = "u_sup";
  us.tolerance = options.u_tolerance;
  // Compare on the nodes of the finer grid, interpolating the coarser one.
  const bool a_fine = a.grid.h() <= b.grid.h();
  const RunResult& fine = a_fine ? a : b;
  const RunResult& coarse = a_fine ? b : a;
  const double centre = 0.5 * (fine.grid.lo + fine.grid.hi);
  for (const Field& f : fine.snapshots) {
    const Field* c = coarse.snapshot_at(f.time, 1e-9);
    if (c == nullptr) continue;
    for (std::size_t i = 0; i < f.grid.n_nodes(); ++i) {
      const double x = f.grid.node(i);
      if (std::abs(x - centre) > options.core_radius || !c->grid.contains(x)) continue;
      const double other = c->grid == f.grid ? c->values[i] : interpolate(*c, x);
      const double d = std::abs(f.values[i] - other);
      if (d > us.value) {
        us.value = d;
        us.witness_time = f.time;
        us.witness_x = x;
      }
    }
  }
  us.passed = us.value <= us.tolerance;
  out.push_back(us);

  DiagnosticEntry ja;
  ja.name = "jump_alignment";
  const auto ja_ = detect_jumps(a.path, options.jump_floor);
  const auto jb = detect_jumps(b.path, options.jump_floor);
  ja.tolerance = 2.0 * std::max(a.path.max_dt(), b.path.max_dt());
  ja.value = jump_misalignment(ja_, jb);
  ja.passed = ja_.size() == jb.size() && ja.value <= ja.tolerance;
  ja.witness_value = static_cast<double>(ja_.size());
  ja.note = fmt::format("{} jump(s) vs {}", ja_.size(), jb.size());
  out.push_back(ja);
  return out;
}

PhiWeights phi_weights(const Trajectory& traj, const MultiplierPath& I1,
                       const MultiplierPath& I2, const ModelSpec& model) {
  using boost::math::quadrature::gauss;
  PhiWeights w;
  w.min = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < traj.velocities.size(); ++k) {
    const double s = 0.5 * (traj.times[k] + traj.times[k + 1]);
    const double a = I1.value_at(s);
    const double b = I2.value_at(s);
    const double x = traj.positions[k + 1];
    const double v = traj.velocities[k];
    const double phi = gauss<double, 16>::integrate(
        [&](double th) { return model.lagrangian((1.0 - th) * a + th * b, x, v).d_I; }, 0.0,
        1.0);
    w.s.push_back(s);
    w.values.push_back(phi);
    w.min = std::min(w.min, phi);
  }
  return w;
}

DiagnosticEntry lower_bound_check(const RunResult& run, const InitialData& g, double C,
                                  double tol) {
  DiagnosticEntry e;
  e.name = "lower_bound";
  e.tolerance = tol;
  const double o = locate_argmin(g);
  const GridSpec& grid = run.grid;
  std::vector<double> base(grid.n_nodes());
  for (std::size_t i = 0; i < grid.n_nodes(); ++i) {
    const double r = std::abs(grid.node(i) - o);
    base[i] = std::min(0.5 * r, far_minimum(g, o, 0.5 * r));
  }
  double worst = std::numeric_limits<double>::infinity();
  for (const Field& f : run.snapshots) {
    for (std::size_t i = 0; i < grid.n_nodes(); ++i) {
      const double margin = f.values[i] - (base[i] - C * f.time);
      if (margin < worst) {
        worst = margin;
        e.witness_time = f.time;
        e.witness_x = grid.node(i);
        e.witness_value = f.values[i];
      }
    }
  }
  e.value = worst;
  e.passed = worst >= -tol;
  e.note = fmt::format("C = {}", C);
  return e;
}

}  // namespace chj
