#include "chj/multiplier.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include <fmt/format.h>

#include "chj/errors.hpp"

namespace chj {

std::vector<double> Stepper::evaluate_all(double I) const {
  const std::size_t n = grid().n_nodes();
  std::vector<std::size_t> nodes(n);
  std::iota(nodes.begin(), nodes.end(), std::size_t{0});
  std::vector<double> out(n);
  evaluate(I, nodes, out);
  return out;
}

namespace {

double min_of(const std::vector<double>& v) {
  return *std::min_element(v.begin(), v.end());
}

}  // namespace

MultiplierStep solve_multiplier_step(const Stepper& stepper,
                                     const MultiplierOptions& options) {
  double lo = options.bracket.lo;
  double hi = options.bracket.hi;
  if (!options.allow_negative) lo = std::max(lo, 0.0);
  if (!(hi > lo)) {
    throw ConfigError(fmt::format("multiplier bracket [{}, {}] is empty", lo, hi));
  }

  std::vector<double> vlo = stepper.evaluate_all(lo);
  std::vector<double> vhi = stepper.evaluate_all(hi);
  double mlo = min_of(vlo);
  double mhi = min_of(vhi);
  int iterations = 2;

  for (int e = 0; mhi < 0.0 && e < options.max_expansions; ++e) {
    const double width = hi - lo;
    lo = hi;
    vlo = std::move(vhi);
    mlo = mhi;
    hi += 2.0 * width;
    vhi = stepper.evaluate_all(hi);
    mhi = min_of(vhi);
    ++iterations;
  }
  if (mhi < 0.0) {
    throw InfeasibleError(
        InfeasibleError::Cause::growth_too_strong,
        fmt::format("no non-negative multiplier achieves the constraint: "
                    "min u+ = {} < 0 at I_max = {} (growth too strong)",
                    mhi, hi));
  }
  for (int e = 0; mlo > 0.0; ++e) {
    if (!options.allow_negative || e >= options.max_expansions) {
      throw InfeasibleError(
          InfeasibleError::Cause::decay_too_strong,
          fmt::format("no non-negative multiplier achieves the constraint: "
                      "min u+ = {} > 0 at I_min = {} (decay too strong)",
                      mlo, lo));
    }
    const double width = hi - lo;
    hi = lo;
    vhi = std::move(vlo);
    mhi = mlo;
    lo -= 2.0 * width;
    vlo = stepper.evaluate_all(lo);
    mlo = min_of(vlo);
    ++iterations;
  }
  if (mlo == mhi) {
    throw InfeasibleError(
        InfeasibleError::Cause::flat,
        fmt::format("one-step operator is flat in I on [{}, {}] (min u+ = {}); "
                    "the multiplier is not determined",
                    lo, hi, mlo));
  }

  const Bracket initial{lo, hi};

  // Candidate nodes: a node whose value at lo already exceeds the current
  // minimum at hi cannot be the argmin anywhere in [lo, hi].
  std::vector<std::size_t> cand(vlo.size());
  std::iota(cand.begin(), cand.end(), std::size_t{0});
  std::vector<double> clo = vlo;
  std::vector<double> chi = vhi;
  auto prune = [&] {
    std::size_t k = 0;
    for (std::size_t j = 0; j < cand.size(); ++j) {
      if (clo[j] <= mhi) {
        cand[k] = cand[j];
        clo[k] = clo[j];
        chi[k] = chi[j];
        ++k;
      }
    }
    cand.resize(k);
    clo.resize(k);
    chi.resize(k);
  };
  prune();

  std::vector<double> vm(cand.size());
  while (hi - lo > options.bracket_width) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    vm.resize(cand.size());
    stepper.evaluate(mid, cand, vm);
    const double mm = *std::min_element(vm.begin(), vm.end());
    ++iterations;
    if (mm >= 0.0) {
      hi = mid;
      mhi = mm;
      chi = vm;
    } else {
      lo = mid;
      mlo = mm;
      clo = vm;
    }
    prune();
  }

  double I = std::abs(mlo) < std::abs(mhi) ? lo : hi;
  if (mhi > mlo) {
    const double s = std::clamp(lo - mlo * (hi - lo) / (mhi - mlo), lo, hi);
    vm.resize(cand.size());
    stepper.evaluate(s, cand, vm);
    ++iterations;
    const double ms = *std::min_element(vm.begin(), vm.end());
    if (std::abs(ms) < std::min(std::abs(mlo), std::abs(mhi))) I = s;
  }

  MultiplierStep out;
  out.I = I;
  out.u_next = stepper.evaluate_all(I);
  out.residual = min_of(out.u_next);
  out.iterations = iterations;
  out.bracket_used = initial;
  if (!(std::abs(out.residual) <= options.tol_constraint)) {
    throw InfeasibleError(
        InfeasibleError::Cause::flat,
        fmt::format("constraint residual {} exceeds tolerance {} at I = {}; the "
                    "one-step operator jumps across zero",
                    out.residual, options.tol_constraint, I));
  }
  return out;
}

// ---------------------------------------------------------------------------

double MultiplierPath::value_at(double t) const {
  if (values.empty()) return std::numeric_limits<double>::quiet_NaN();
  if (t <= times.front()) return values.front();
  // first boundary >= t; interval n = (times[n], times[n+1]]
  auto it = std::lower_bound(times.begin() + 1, times.end(), t);
  if (it == times.end()) return values.back();
  const auto n = static_cast<std::size_t>(it - times.begin()) - 1;
  return values[n];
}

double MultiplierPath::bv(double t) const {
  double s = 0.0;
  for (std::size_t n = 1; n < values.size(); ++n) {
    if (times[n] > t) break;
    s += std::abs(values[n] - values[n - 1]);
  }
  return s;
}

double MultiplierPath::max_dt() const {
  double m = 0.0;
  for (std::size_t n = 0; n + 1 < times.size(); ++n) m = std::max(m, times[n + 1] - times[n]);
  return m;
}

MultiplierPath MultiplierPath::truncated(double t) const {
  MultiplierPath out;
  if (times.empty()) return out;
  std::size_t best = 0;
  for (std::size_t n = 0; n < times.size(); ++n) {
    if (std::abs(times[n] - t) < std::abs(times[best] - t)) best = n;
  }
  out.times.assign(times.begin(), times.begin() + static_cast<std::ptrdiff_t>(best) + 1);
  out.values.assign(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(best));
  out.residuals.assign(residuals.begin(), residuals.begin() + static_cast<std::ptrdiff_t>(best));
  out.iterations.assign(iterations.begin(), iterations.begin() + static_cast<std::ptrdiff_t>(best));
  return out;
}

double l1_distance(const MultiplierPath& a, const MultiplierPath& b, double t0,
                   double t1) {
  if (!(t1 > t0)) return 0.0;
  std::vector<double> cuts{t0, t1};
  for (double t : a.times) if (t > t0 && t < t1) cuts.push_back(t);
  for (double t : b.times) if (t > t0 && t < t1) cuts.push_back(t);
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
  double s = 0.0;
  for (std::size_t k = 0; k + 1 < cuts.size(); ++k) {
    // both paths are constant on (cuts[k], cuts[k+1]]; sample at the right end
    const double t = cuts[k + 1];
    s += std::abs(a.value_at(t) - b.value_at(t)) * (cuts[k + 1] - cuts[k]);
  }
  return s;
}

std::vector<bool> flag_increments(const MultiplierPath& path, double floor) {
  const std::size_t n = path.values.size();
  if (n < 2) return {};
  std::vector<double> sig;
  for (std::size_t k = 0; k + 1 < n; ++k) {
    const double d = std::abs(path.values[k + 1] - path.values[k]);
    if (d > 1e-12) sig.push_back(d);
  }
  double median = 0.0;
  if (!sig.empty()) {
    auto mid = sig.begin() + static_cast<std::ptrdiff_t>(sig.size() / 2);
    std::nth_element(sig.begin(), mid, sig.end());
    median = *mid;
  }
  const double threshold = std::max(10.0 * median, floor);
  std::vector<bool> flags(n - 1);
  for (std::size_t k = 0; k + 1 < n; ++k) {
    flags[k] = std::abs(path.values[k + 1] - path.values[k]) > threshold;
  }
  return flags;
}

std::vector<Jump> detect_jumps(const MultiplierPath& path, double floor) {
  std::vector<Jump> out;
  const auto flags = flag_increments(path, floor);
  std::size_t k = 0;
  while (k < flags.size()) {
    if (!flags[k]) {
      ++k;
      continue;
    }
    Jump j;
    double largest = 0.0;
    double total = 0.0;
    for (; k < flags.size() && flags[k]; ++k) {
      const double inc = path.values[k + 1] - path.values[k];
      total += inc;
      if (std::abs(inc) > largest) {
        largest = std::abs(inc);
        j.index = k + 1;
      }
    }
    j.size = total;
    j.time = path.times[j.index];
    out.push_back(j);
  }
  return out;
}

const Field* RunResult::snapshot_at(double t, double tol) const {
  for (const auto& f : snapshots) {
    if (std::abs(f.time - t) <= tol) return &f;
  }
  return nullptr;
}

// ---------------------------------------------------------------------------

Field initial_field(const Problem& problem) {
  Field u = Field::sample(problem.grid, [&](double x) { return problem.g(x); }, 0.0);
  // Enforce min = 0 on the grid exactly; the scenario layer records the
  // shift of g, this only removes rounding.
  const double m = u.min();
  if (m != 0.0) {
    for (double& v : u.values) v -= m;
  }
  return u;
}

namespace {

template <class E>
[[noreturn]] void rethrow_with(const E&, const std::string& ctx, const std::exception& e) {
  throw E(ctx + e.what());
}

}  // namespace

RunResult run(const Problem& problem, const Route& route) {
  RunResult r;
  r.route = route.name();
  r.scenario = problem.name;
  r.grid = problem.grid;
  r.T = problem.T;

  if (problem.T < 0.0) throw ConfigError(fmt::format("T = {} must be non-negative", problem.T));

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
  route.on_start(problem, u, r);
  if (problem.T == 0.0) return r;

  const std::size_t n_cells = static_cast<std::size_t>(problem.grid.n_cells);
  const auto buffer = static_cast<std::size_t>(problem.boundary_cells);
  double t = 0.0;
  double I_prev = 0.5 * (problem.multiplier.bracket.lo + problem.multiplier.bracket.hi);
  std::size_t next_stop = 0;

  while (next_stop < stops.size()) {
    const double target = stops[next_stop];
    const std::string ctx = fmt::format("route {} at t = {}: ", r.route, t);
    try {
      double dt = route.choose_dt(problem, u, I_prev);
      bool lands = false;
      if (t + dt >= target - 1e-12 * std::max(1.0, target)) {
        dt = target - t;
        lands = true;
      }
      auto stepper = route.make_stepper(problem, u, dt);
      MultiplierStep ms = solve_multiplier_step(*stepper, problem.multiplier);
      const double t_next = lands ? target : t + dt;
      Field next{problem.grid, std::move(ms.u_next), t_next};

      const std::size_t am = next.argmin();
      if (am < buffer || am > n_cells - buffer) {
        throw DomainTooSmallError(fmt::format(
            "argmin x = {} is within {} cells of the boundary of [{}, {}]",
            problem.grid.node(am), problem.boundary_cells, problem.grid.lo,
            problem.grid.hi));
      }
      route.on_accept(problem, *stepper, ms.I, t, next, r);

      StepRecord rec;
      rec.time = t_next;
      rec.dt = dt;
      rec.I = ms.I;
      rec.min_before = u.min();
      rec.min_after = ms.residual;
      rec.argmin_x = problem.grid.node(am);
      rec.bracket = ms.bracket_used;
      rec.iterations = ms.iterations;
      r.steps.push_back(rec);
      r.path.times.push_back(t_next);
      r.path.values.push_back(ms.I);
      r.path.residuals.push_back(ms.residual);
      r.path.iterations.push_back(ms.iterations);

      t = t_next;
      u = std::move(next);
      I_prev = ms.I;
      if (lands) {
        r.snapshots.push_back(u);
        ++next_stop;
      }
    } catch (const InfeasibleError& e) {
      throw InfeasibleError(e.cause(), ctx + e.what());
    } catch (const DomainTooSmallError& e) {
      rethrow_with(e, ctx, e);
    } catch (const StepSizeError& e) {
      rethrow_with(e, ctx, e);
    } catch (const BlowUpError& e) {
      rethrow_with(e, ctx, e);
    } catch (const UnsupportedRunError& e) {
      rethrow_with(e, ctx, e);
    } catch (const ConfigError& e) {
      rethrow_with(e, ctx, e);
    } catch (const std::exception& e) {
      throw RunError(ctx + e.what());
    }
  }
  return r;
}

}  // namespace chj
