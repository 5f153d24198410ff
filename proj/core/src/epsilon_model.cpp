#include "chj/epsilon_model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <fmt/format.h>

#include "chj/errors.hpp"

namespace chj {

namespace {

double max_abs_gradient(const Field& u) {
  const double h = u.grid.h();
  double m = 0.0;
  for (std::size_t i = 0; i + 1 < u.values.size(); ++i) {
    m = std::max(m, std::abs(u.values[i + 1] - u.values[i]) / h);
  }
  return m;
}

}  // namespace

double eps_stable_dt(const Field& u, double eps) {
  const double h = u.grid.h();
  const double speed = 2.0 * max_abs_gradient(u);
  double dt = 0.4 * h * h / (2.0 * eps);
  if (speed > 0.0) dt = std::min(dt, 0.4 * h / speed);
  return dt;
}

Field eps_step(const Field& u, double I, double eps, double dt, const ModelSpec& model) {
  if (model.kind() != ModelKind::quadratic) {
    throw ModelError("the viscous route is defined for quadratic models only");
  }
  const double limit = eps_stable_dt(u, eps);
  if (dt > limit * (1.0 + 1e-12)) {
    throw StepSizeError(
        fmt::format("dt = {} exceeds the explicit stability limit {} (eps = {})", dt, limit, eps));
  }
  const std::size_t n = u.values.size();
  const double h = u.grid.h();
  Field out{u.grid, std::vector<double>(n), u.time + dt};
  for (std::size_t i = 0; i < n; ++i) {
    // Neumann: ghost values mirror the first interior neighbour.
    const double ul = u.values[i == 0 ? 1 : i - 1];
    const double ur = u.values[i + 1 == n ? n - 2 : i + 1];
    const double pm = (u.values[i] - ul) / h;
    const double pp = (ur - u.values[i]) / h;
    const double alpha = 2.0 * std::max(std::abs(pm), std::abs(pp));
    const double pc = 0.5 * (pm + pp);
    const double G = pc * pc - 0.5 * alpha * (pp - pm);
    const double lap = (ul - 2.0 * u.values[i] + ur) / (h * h);
    const double R = model.hamiltonian_value(I, u.grid.node(i), 0.0);
    const double v = u.values[i] - dt * (R + G - eps * lap);
    if (!std::isfinite(v)) {
      throw BlowUpError(fmt::format("non-finite value at node {} (eps = {})", i, eps));
    }
    out.values[i] = v;
  }
  return out;
}

double compute_I_eps(const Field& u, const Weight& psi, double eps) {
  const double m = u.min();
  const double h = u.grid.h();
  const std::size_t n = u.values.size();
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double w = (i == 0 || i + 1 == n) ? 0.5 : 1.0;
    s += w * psi(u.grid.node(i)) * std::exp(-(u.values[i] - m) / eps);
  }
  const double log_I = std::log(s * h) - m / eps;
  if (log_I > std::log(std::numeric_limits<double>::max())) {
    throw BlowUpError(fmt::format(
        "int psi exp(-u/eps) overflows: min u = {} at eps = {}", m, eps));
  }
  return std::exp(log_I);
}

double EpsRunResult::sup_abs_min() const {
  double s = 0.0;
  for (double m : min_u) s = std::max(s, std::abs(m));
  return s;
}

EpsRunResult run_eps(const Problem& problem, double eps, const Weight& psi) {
  if (!(eps > 0.0 && eps <= 1.0)) {
    throw ConfigError(fmt::format("eps = {} must lie in (0, 1]", eps));
  }
  EpsRunResult r;
  r.eps = eps;
  std::vector<double> stops;
  for (double s : problem.snapshot_times) {
    if (s > 0.0 && s < problem.T) stops.push_back(s);
  }
  stops.push_back(problem.T);
  std::sort(stops.begin(), stops.end());
  stops.erase(std::unique(stops.begin(), stops.end()), stops.end());

  Field u = initial_field(problem);
  r.snapshots.push_back(u);
  r.path.times.push_back(0.0);
  r.min_u.push_back(u.min());
  r.mass.push_back(compute_I_eps(u, psi, eps));
  if (problem.T <= 0.0) return r;

  double t = 0.0;
  for (double target : stops) {
    while (t < target) {
      try {
        double dt = eps_stable_dt(u, eps);
        bool lands = false;
        if (t + dt >= target - 1e-12 * std::max(1.0, target)) {
          dt = target - t;
          lands = true;
        }
        const double I = r.mass.back();
        u = eps_step(u, I, eps, dt, problem.model);
        t = lands ? target : t + dt;
        u.time = t;
        r.path.times.push_back(t);
        r.path.values.push_back(I);
        r.path.residuals.push_back(r.min_u.back());
        r.path.iterations.push_back(0);
        r.min_u.push_back(u.min());
        r.mass.push_back(compute_I_eps(u, psi, eps));
      } catch (const StepSizeError& e) {
        throw StepSizeError(fmt::format("route eps({}) at t = {}: {}", eps, t, e.what()));
      } catch (const BlowUpError& e) {
        throw BlowUpError(fmt::format("route eps({}) at t = {}: {}", eps, t, e.what()));
      }
    }
    r.snapshots.push_back(u);
  }
  return r;
}

std::vector<ConvergenceRow> convergence_table(const Problem& problem,
                                              const std::vector<double>& eps_list,
                                              const RunResult& reference, const Weight& psi,
                                              double core_radius,
                                              std::vector<EpsRunResult>* runs) {
  if (eps_list.empty()) throw ConfigError("convergence table needs at least one eps");
  const double T = problem.T;
  const double centre = 0.5 * (problem.grid.lo + problem.grid.hi);
  std::vector<ConvergenceRow> rows;
  for (double eps : eps_list) {
    EpsRunResult er = run_eps(problem, eps, psi);
    ConvergenceRow row;
    row.eps = eps;
    row.l1_I = l1_distance(er.path, reference.path, 0.1 * T, T);
    row.sup_min_u = er.sup_abs_min();
    for (const Field& ue : er.snapshots) {
      const Field* ref = reference.snapshot_at(ue.time, 1e-9);
      if (ref == nullptr) continue;
      for (std::size_t i = 0; i < ref->grid.n_nodes(); ++i) {
        const double x = ref->grid.node(i);
        if (std::abs(x - centre) > core_radius || !ue.grid.contains(x)) continue;
        row.linf_u = std::max(row.linf_u, std::abs(interpolate(ue, x) - ref->values[i]));
      }
    }
    row.order_I = row.order_u = std::numeric_limits<double>::quiet_NaN();
    if (!rows.empty()) {
      const auto& p = rows.back();
      const double r = std::log(p.eps / eps);
      row.order_I = std::log(p.l1_I / row.l1_I) / r;
      row.order_u = std::log(p.linf_u / row.linf_u) / r;
    }
    rows.push_back(row);
    if (runs != nullptr) runs->push_back(std::move(er));
  }
  return rows;
}

}  // namespace chj
