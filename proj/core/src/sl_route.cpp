#include "chj/sl_route.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <fmt/format.h>

#include "chj/errors.hpp"

namespace chj {

std::string to_string(SlSearch search) {
  return search == SlSearch::exact ? "exact" : "node_lattice";
}

SlSearch parse_sl_search(const std::string& name) {
  if (name == "exact") return SlSearch::exact;
  if (name == "node_lattice") return SlSearch::node_lattice;
  throw ConfigError(fmt::format("unknown semi-Lagrangian search '{}'", name));
}

namespace {

struct Best {
  SlChoice c{std::numeric_limits<double>::infinity(), 0.0, 0.0};
  bool found = false;

  void consider(double value, double v, double foot) {
    if (!found || value < c.value ||
        (value == c.value &&
         (std::abs(v) < std::abs(c.velocity) ||
          (std::abs(v) == std::abs(c.velocity) && v < c.velocity)))) {
      c = {value, v, foot};
      found = true;
    }
  }
};

}  // namespace

SlChoice sl_minimize(const Field& u, const ModelSpec& model, double I, double x,
                     double dt, double v_max, SlSearch search) {
  const GridSpec& g = u.grid;
  const double h = g.h();
  const double ya = std::max(g.lo, x - dt * v_max);
  const double yb = std::min(g.hi, x + dt * v_max);
  if (!(ya <= yb)) {
    throw DomainTooSmallError(fmt::format(
        "no admissible foot for x = {} (dt = {}, V_max = {})", x, dt, v_max));
  }
  const auto n_cells = static_cast<std::ptrdiff_t>(g.n_cells);
  Best best;

  if (search == SlSearch::node_lattice) {
    auto j0 = static_cast<std::ptrdiff_t>(std::ceil((ya - g.lo) / h - 1e-9));
    auto j1 = static_cast<std::ptrdiff_t>(std::floor((yb - g.lo) / h + 1e-9));
    j0 = std::clamp<std::ptrdiff_t>(j0, 0, n_cells);
    j1 = std::clamp<std::ptrdiff_t>(j1, 0, n_cells);
    for (std::ptrdiff_t j = j0; j <= j1; ++j) {
      const auto k = static_cast<std::size_t>(j);
      const double y = g.node(k);
      const double v = (x - y) / dt;
      if (std::abs(v) > v_max * (1.0 + 1e-12)) continue;
      best.consider(dt * model.lagrangian_value(I, x, v) + u.values[k], v, y);
    }
    if (!best.found) {
      throw DomainTooSmallError(fmt::format("no lattice velocity admissible at x = {}", x));
    }
    return best.c;
  }

  auto at_point = [&](double y) {
    const double v = (x - y) / dt;
    best.consider(dt * model.lagrangian_value(I, x, v) + interpolate_unchecked(u, y), v, y);
  };

  auto j0 = static_cast<std::ptrdiff_t>(std::floor((ya - g.lo) / h));
  auto j1 = static_cast<std::ptrdiff_t>(std::ceil((yb - g.lo) / h)) - 1;
  j0 = std::clamp<std::ptrdiff_t>(j0, 0, n_cells - 1);
  j1 = std::clamp<std::ptrdiff_t>(j1, j0, n_cells - 1);
  for (std::ptrdiff_t j = j0; j <= j1; ++j) {
    const auto k = static_cast<std::size_t>(j);
    const double xl = g.node(k);
    const double a = std::max(xl, ya);
    const double b = std::min(g.node(k + 1), yb);
    if (a > b) continue;
    const double s = (u.values[k + 1] - u.values[k]) / h;
    // The cost along the cell is convex in the foot; its stationary point has
    // d_v L(v) = s, i.e. v = d_p H(s).
    const double vs = model.velocity(I, x, s);
    const double ys = x - dt * vs;
    if (ys >= a && ys <= b) {
      const double L = s * vs - model.hamiltonian_value(I, x, s);
      best.consider(dt * L + u.values[k] + s * (ys - xl), vs, ys);
    } else {
      at_point(ys < a ? a : b);
    }
  }
  if (!best.found) {
    throw DomainTooSmallError(fmt::format("no admissible foot for x = {}", x));
  }
  return best.c;
}

SlStepOutput sl_step(const Field& u, double I, double dt, const ModelSpec& model,
                     double v_max, SlSearch search) {
  SlStepper s(model, u, dt, v_max, search);
  SlStepOutput out{Field{u.grid, s.evaluate_all(I), u.time + dt}, s.argmin_map(I)};
  out.map.time = u.time;
  return out;
}

double velocity_bound(const ModelSpec& model, const Field& u, const Bracket& bracket) {
  const GridSpec& g = u.grid;
  double s_lo = 0.0;
  double s_hi = 0.0;
  for (std::size_t k = 0; k + 1 < g.n_nodes(); ++k) {
    const double s = (u.values[k + 1] - u.values[k]) / g.h();
    s_lo = std::min(s_lo, s);
    s_hi = std::max(s_hi, s);
  }
  double m = 0.0;
  for (double I : {bracket.lo, 0.5 * (bracket.lo + bracket.hi), bracket.hi}) {
    for (std::size_t i = 0; i < g.n_nodes(); ++i) {
      const double x = g.node(i);
      m = std::max({m, std::abs(model.velocity(I, x, s_lo)),
                    std::abs(model.velocity(I, x, s_hi))});
    }
  }
  return 2.0 * std::max(m, 1e-3);
}

// ---------------------------------------------------------------------------

void SlStepper::evaluate(double I, std::span<const std::size_t> nodes,
                         std::span<double> out) const {
  for (std::size_t k = 0; k < nodes.size(); ++k) {
    const std::size_t i = nodes[k];
    const double v = sl_minimize(u_, model_, I, u_.grid.node(i), dt_, v_max_, search_).value;
    if (!std::isfinite(v)) {
      throw BlowUpError(fmt::format("non-finite value at node {} (I = {})", i, I));
    }
    out[k] = v;
  }
}

ArgminMap SlStepper::argmin_map(double I) const {
  ArgminMap m;
  m.time = u_.time;
  m.dt = dt_;
  m.I = I;
  const std::size_t n = u_.grid.n_nodes();
  m.velocity.resize(n);
  m.foot.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto c = sl_minimize(u_, model_, I, u_.grid.node(i), dt_, v_max_, search_);
    m.velocity[i] = c.velocity;
    m.foot[i] = c.foot;
    if (std::abs(c.velocity) >= v_max_ * (1.0 - 1e-12)) ++m.saturated;
  }
  return m;
}

std::unique_ptr<Stepper> SlRoute::make_stepper(const Problem& problem, const Field& u,
                                               double dt) const {
  const double v_max =
      v_max_ > 0.0 ? v_max_ : velocity_bound(problem.model, u, problem.multiplier.bracket);
  return std::make_unique<SlStepper>(problem.model, u, dt, v_max, search_);
}

void SlRoute::on_start(const Problem&, const Field& u, RunResult& run) const {
  run.history.push_back(u);
}

void SlRoute::on_accept(const Problem&, const Stepper& stepper, double I, double t_start,
                        const Field& next, RunResult& run) const {
  const auto& s = dynamic_cast<const SlStepper&>(stepper);
  ArgminMap m = s.argmin_map(I);
  m.time = t_start;
  run.saturation_count += m.saturated;
  run.velocity_bound = std::max(run.velocity_bound, s.v_max());
  run.argmin_maps.push_back(std::move(m));
  run.history.push_back(next);
}

RunResult run_sl(const Problem& problem, double dt, SlSearch search) {
  if (!(dt > 0.0)) throw ConfigError(fmt::format("sl_dt = {} must be positive", dt));
  return run(problem, SlRoute(dt, 0.0, search));
}

// ---------------------------------------------------------------------------

namespace {

double lerp_nodes(const GridSpec& g, const std::vector<double>& d, double y) {
  const double s = (std::clamp(y, g.lo, g.hi) - g.lo) / g.h();
  const auto i = std::clamp<std::ptrdiff_t>(static_cast<std::ptrdiff_t>(std::floor(s)), 0,
                                            g.n_cells - 1);
  const double w = s - static_cast<double>(i);
  const auto k = static_cast<std::size_t>(i);
  return (1.0 - w) * d[k] + w * d[k + 1];
}

/// Centred nodal differences, linearly interpolated inside each cell. At a node
/// where the slope drops by more than sqrt(h) times the local slope scale the field has a
/// concave kink; there the cell's own slope is used so that the two sides of the
/// kink are not averaged.
struct GradientField {
  GridSpec grid;
  std::vector<double> values;
  std::vector<double> slope;
  std::vector<double> d;
  std::vector<bool> kink;

  explicit GradientField(const Field& u)
      : grid(u.grid), values(u.values), slope(u.grid.n_cells), d(u.grid.n_nodes()), kink(u.grid.n_nodes(), false) {
    const std::size_t n = d.size();
    const double h = grid.h();
    for (std::size_t j = 0; j + 1 < n; ++j) slope[j] = (u.values[j + 1] - u.values[j]) / h;
    for (std::size_t i = 1; i + 1 < n; ++i) {
      d[i] = 0.5 * (slope[i - 1] + slope[i]);
      const double scale = 1.0 + std::abs(slope[i - 1]) + std::abs(slope[i]);
      kink[i] = slope[i - 1] - slope[i] > std::sqrt(h) * scale;
    }
    d[0] = slope[0];
    d[n - 1] = slope[n - 2];
  }

  double operator()(double y) const {
    const double s = (std::clamp(y, grid.lo, grid.hi) - grid.lo) / grid.h();
    const auto j = static_cast<std::size_t>(std::clamp<std::ptrdiff_t>(
        static_cast<std::ptrdiff_t>(std::floor(s)), 0, grid.n_cells - 1));
    const double w = s - static_cast<double>(j);
    if ((kink[j] || kink[j + 1]) && j > 0 && j + 2 < d.size() &&
        slope[j - 1] > slope[j + 1]) {
      // The kink may sit inside this cell: place it where the neighbouring lines meet.
      const double xl = grid.node(j), xr = grid.node(j + 1);
      const double cross = (values[j + 1] - values[j] + slope[j - 1] * xl - slope[j + 1] * xr) /
                           (slope[j - 1] - slope[j + 1]);
      if (cross >= xl && cross <= xr) return y < cross ? slope[j - 1] : slope[j + 1];
    }
    const double left = kink[j] ? slope[j] : d[j];
    const double right = kink[j + 1] ? slope[j] : d[j + 1];
    return (1.0 - w) * left + w * right;
  }
};

}  // namespace

Trajectory backtrack_trajectory(const RunResult& run, const ModelSpec& model, double t,
                                double x) {
  const auto& times = run.path.times;
  if (run.argmin_maps.empty() || run.history.size() != times.size() ||
      run.argmin_maps.size() + 1 != times.size()) {
    throw UnsupportedRunError(fmt::format(
        "run '{}' has no stored argmin maps; backtracking needs a semi-Lagrangian run",
        run.route));
  }
  std::size_t K = 0;
  for (std::size_t k = 0; k < times.size(); ++k) {
    if (std::abs(times[k] - t) < std::abs(times[K] - t)) K = k;
  }
  const GridSpec& grid = run.grid;
  const std::size_t node = grid.nearest(x);

  Trajectory tr;
  tr.times.assign(times.begin(), times.begin() + static_cast<std::ptrdiff_t>(K) + 1);
  tr.positions.assign(K + 1, 0.0);
  tr.velocities.assign(K, 0.0);
  tr.multipliers.assign(K, 0.0);
  tr.value = run.history[K].values[node];
  tr.positions[K] = grid.node(node);

  double action = 0.0;
  double y = tr.positions[K];
  for (std::size_t k = K; k-- > 0;) {
    const double I = run.path.values[k];
    const double dt = times[k + 1] - times[k];
    const Field& prev = run.history[k];
    const ArgminMap& map = run.argmin_maps[k];
    const double v_max = run.velocity_bound > 0.0 ? run.velocity_bound
                                                  : std::numeric_limits<double>::infinity();

    const GradientField grad(prev);
    double v = lerp_nodes(grid, map.velocity, y);
    bool converged = false;
    for (int it = 0; it < 60; ++it) {
      const double foot = std::clamp(y - dt * v, grid.lo, grid.hi);
      const double vn = model.velocity(I, y, grad(foot));
      if (std::abs(vn - v) <= 1e-12 * (1.0 + std::abs(v))) {
        v = vn;
        converged = true;
        break;
      }
      v = vn;
    }
    double foot = y - dt * v;
    if (!converged || !grid.contains(foot) || std::abs(v) > v_max) {
      const auto c = sl_minimize(prev, model, I, y, dt,
                                 std::isfinite(v_max) ? v_max : 1e6, SlSearch::exact);
      v = c.velocity;
      foot = c.foot;
    }
    action += dt * model.lagrangian_value(I, y, v);
    tr.velocities[k] = v;
    tr.multipliers[k] = I;
    tr.positions[k] = foot;
    y = foot;
  }
  action += interpolate_unchecked(run.history.front(), y);
  tr.action = action;
  tr.bv_of_velocity = bv_seminorm(tr.velocities);
  return tr;
}

double euler_lagrange_residual(const Trajectory& traj, const MultiplierPath& path,
                               const ModelSpec& model) {
  const std::size_t K = traj.velocities.size();
  if (K < 2) return 0.0;
  const auto flags = flag_increments(path);
  double worst = 0.0;
  auto I_of = [&](std::size_t k) {
    return k < path.values.size() ? path.values[k] : traj.multipliers[k];
  };
  for (std::size_t n = 0; n + 1 < K; ++n) {
    if (n < flags.size() && flags[n]) continue;
    const double dt = traj.times[n + 1] - traj.times[n];
    const double In = I_of(n);
    const double In1 = I_of(n + 1);
    const double p0 = model.momentum(In, traj.positions[n + 1], traj.velocities[n]);
    const double p1 = model.momentum(In1, traj.positions[n + 2], traj.velocities[n + 1]);
    const double Lx = model.lagrangian(In, traj.positions[n + 1], traj.velocities[n]).d_x;
    worst = std::max(worst, std::abs((p1 - p0) / dt - Lx));
  }
  return worst;
}

double bv_seminorm(std::span<const double> samples) {
  double s = 0.0;
  for (std::size_t k = 1; k < samples.size(); ++k) s += std::abs(samples[k] - samples[k - 1]);
  return s;
}

}  // namespace chj
