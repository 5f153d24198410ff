#include "chj/scenario.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <map>
#include <sstream>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "chj/errors.hpp"
#include "chj/fd_route.hpp"
#include "chj/sl_route.hpp"
#include "io.hpp"

namespace chj {

namespace {

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return {};
  const auto b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

struct Item {
  std::string value;
  int line = 0;
};

[[noreturn]] void bad(const std::string& key, int line, const std::string& why) {
  throw ConfigError(fmt::format("line {}: key '{}': {}", line, key, why));
}

double to_double(const std::string& key, const Item& it) {
  double v = 0.0;
  const char* b = it.value.data();
  const char* e = b + it.value.size();
  auto [p, ec] = std::from_chars(b, e, v);
  if (ec != std::errc() || p != e || !std::isfinite(v)) {
    bad(key, it.line, fmt::format("expected a number, got '{}'", it.value));
  }
  return v;
}

int to_int(const std::string& key, const Item& it) {
  int v = 0;
  const char* b = it.value.data();
  const char* e = b + it.value.size();
  auto [p, ec] = std::from_chars(b, e, v);
  if (ec != std::errc() || p != e) {
    bad(key, it.line, fmt::format("expected an integer, got '{}'", it.value));
  }
  return v;
}

bool to_bool(const std::string& key, const Item& it) {
  if (it.value == "true" || it.value == "1" || it.value == "yes") return true;
  if (it.value == "false" || it.value == "0" || it.value == "no") return false;
  bad(key, it.line, fmt::format("expected true or false, got '{}'", it.value));
}

std::vector<std::string> to_list(const Item& it) {
  std::vector<std::string> out;
  std::stringstream ss(it.value);
  std::string part;
  while (std::getline(ss, part, ',')) {
    part = trim(part);
    if (!part.empty()) out.push_back(part);
  }
  return out;
}

std::vector<double> to_doubles(const std::string& key, const Item& it) {
  std::vector<double> out;
  for (const auto& s : to_list(it)) out.push_back(to_double(key, Item{s, it.line}));
  return out;
}

using Setter = std::function<void(ScenarioConfig&, const std::string&, const Item&)>;

Setter num(double ScenarioConfig::*field) {
  return [field](ScenarioConfig& c, const std::string& k, const Item& it) {
    c.*field = to_double(k, it);
  };
}

Setter opt_num(std::optional<double> ScenarioConfig::*field) {
  return [field](ScenarioConfig& c, const std::string& k, const Item& it) {
    c.*field = to_double(k, it);
  };
}

Setter str(std::string ScenarioConfig::*field) {
  return [field](ScenarioConfig& c, const std::string&, const Item& it) { c.*field = it.value; };
}

const std::map<std::string, Setter>& setters() {
  static const std::map<std::string, Setter> table = {
      {"name", str(&ScenarioConfig::name)},
      {"model", str(&ScenarioConfig::model)},
      {"r0", num(&ScenarioConfig::r0)},
      {"r1", num(&ScenarioConfig::r1)},
      {"r2", num(&ScenarioConfig::r2)},
      {"x0", num(&ScenarioConfig::x0)},
      {"c_I", num(&ScenarioConfig::c_I)},
      {"b_amp", num(&ScenarioConfig::b_amp)},
      {"b_width", num(&ScenarioConfig::b_width)},
      {"b_decay", num(&ScenarioConfig::b_decay)},
      {"b_floor", num(&ScenarioConfig::b_floor)},
      {"d0", num(&ScenarioConfig::d0)},
      {"d_I", num(&ScenarioConfig::d_I)},
      {"sigma", num(&ScenarioConfig::sigma)},
      {"profile", str(&ScenarioConfig::profile)},
      {"theta_coeff", num(&ScenarioConfig::theta_coeff)},
      {"c_theta", num(&ScenarioConfig::c_theta)},
      {"g", str(&ScenarioConfig::g)},
      {"g_center", num(&ScenarioConfig::g_center)},
      {"g_scale", num(&ScenarioConfig::g_scale)},
      {"g_left", num(&ScenarioConfig::g_left)},
      {"g_right", num(&ScenarioConfig::g_right)},
      {"g_offset", num(&ScenarioConfig::g_offset)},
      {"g_table", str(&ScenarioConfig::g_table)},
      {"g_lift", num(&ScenarioConfig::g_lift)},
      {"psi", num(&ScenarioConfig::psi)},
      {"psi_table", str(&ScenarioConfig::psi_table)},
      {"T", num(&ScenarioConfig::T)},
      {"n_cells",
       [](ScenarioConfig& c, const std::string& k, const Item& it) { c.n_cells = to_int(k, it); }},
      {"domain_lo", opt_num(&ScenarioConfig::domain_lo)},
      {"domain_hi", opt_num(&ScenarioConfig::domain_hi)},
      {"margin", num(&ScenarioConfig::margin)},
      {"safety", num(&ScenarioConfig::safety)},
      {"routes", [](ScenarioConfig& c, const std::string&, const Item& it) { c.routes = to_list(it); }},
      {"fd_scheme", str(&ScenarioConfig::fd_scheme)},
      {"sl_dt", opt_num(&ScenarioConfig::sl_dt)},
      {"sl_search", str(&ScenarioConfig::sl_search)},
      {"eps",
       [](ScenarioConfig& c, const std::string& k, const Item& it) { c.eps_list = to_doubles(k, it); }},
      {"tol_constraint", num(&ScenarioConfig::tol_constraint)},
      {"bracket_width", num(&ScenarioConfig::bracket_width)},
      {"tol_dual", num(&ScenarioConfig::tol_dual)},
      {"tol_action", opt_num(&ScenarioConfig::tol_action)},
      {"I_min", num(&ScenarioConfig::I_min)},
      {"I_max", num(&ScenarioConfig::I_max)},
      {"allow_negative",
       [](ScenarioConfig& c, const std::string& k, const Item& it) { c.allow_negative = to_bool(k, it); }},
      {"output", str(&ScenarioConfig::output)},
      {"snapshots",
       [](ScenarioConfig& c, const std::string& k, const Item& it) { c.snapshots = to_doubles(k, it); }},
      {"trajectories",
       [](ScenarioConfig& c, const std::string& k, const Item& it) { c.trajectories = to_int(k, it); }},
      {"core_radius", num(&ScenarioConfig::core_radius)},
      {"check_lattice",
       [](ScenarioConfig& c, const std::string& k, const Item& it) { c.check_lattice = to_int(k, it); }},
  };
  return table;
}

void validate(const ScenarioConfig& c, const std::map<std::string, Item>& items) {
  auto line_of = [&](const std::string& k) {
    auto it = items.find(k);
    return it == items.end() ? 0 : it->second.line;
  };
  auto fail = [&](const std::string& k, const std::string& why) { bad(k, line_of(k), why); };

  if (c.name.empty()) fail("name", "required key is missing");
  if (!(c.T >= 0.0)) fail("T", fmt::format("T = {} must be non-negative", c.T));
  if (c.model != "quadratic" && c.model != "kernel" && c.model != "tabulated") {
    fail("model", fmt::format("unknown model '{}' (quadratic, kernel, tabulated)", c.model));
  }
  if (c.model == "tabulated" && c.profile.empty()) fail("profile", "required for model = tabulated");
  static const std::vector<std::string> gs{"quadratic-well", "shifted-well", "double-well",
                                           "soft-well", "tabulated"};
  if (std::find(gs.begin(), gs.end(), c.g) == gs.end()) {
    fail("g", fmt::format("unknown initial data '{}'", c.g));
  }
  if (c.g == "tabulated" && c.g_table.empty()) fail("g_table", "required for g = tabulated");
  if (c.n_cells < 64) fail("n_cells", fmt::format("{} cells is below the minimum of 64", c.n_cells));
  if (c.domain_lo.has_value() != c.domain_hi.has_value()) {
    fail(c.domain_lo ? "domain_hi" : "domain_lo", "domain_lo and domain_hi go together");
  }
  if (c.domain_lo && !(*c.domain_hi > *c.domain_lo)) fail("domain_hi", "must exceed domain_lo");
  for (const auto& r : c.routes) {
    if (r != "fd" && r != "sl" && r != "eps") {
      fail("routes", fmt::format("unknown route '{}' (fd, sl, eps)", r));
    }
  }
  if (c.routes.empty()) fail("routes", "at least one route is required");
  for (double e : c.eps_list) {
    if (!(e > 0.0 && e <= 1.0)) fail("eps", fmt::format("eps = {} must lie in (0, 1]", e));
  }
  if (c.sl_dt && !(*c.sl_dt > 0.0)) fail("sl_dt", "must be positive");
  if (!(c.psi > 0.0)) fail("psi", "must be positive");
  if (!(c.tol_constraint > 0.0)) fail("tol_constraint", "must be positive");
  if (!(c.bracket_width > 0.0)) fail("bracket_width", "must be positive");
  if (!(c.I_max > c.I_min)) fail("I_max", "must exceed I_min");
  if (c.I_min < 0.0 && !c.allow_negative) fail("I_min", "negative multipliers need allow_negative = true");
  if (!(c.margin > 0.0)) fail("margin", "must be positive");
  if (!(c.safety >= 1.0)) fail("safety", "must be at least 1");
  if (c.trajectories < 0) fail("trajectories", "must be non-negative");
  if (c.check_lattice < 3) fail("check_lattice", "must be at least 3");
  for (double s : c.snapshots) {
    if (!(s >= 0.0 && s <= c.T)) fail("snapshots", fmt::format("time {} outside [0, T]", s));
  }
  parse_fd_scheme(c.fd_scheme);
  parse_sl_search(c.sl_search);
}

}  // namespace

std::vector<std::string> registry_names() {
  return {"quadratic", "moving-optimum", "jump", "kernel-gaussian"};
}

ScenarioConfig registry_scenario(const std::string& name) {
  ScenarioConfig c;
  c.name = name;
  c.scenario = name;
  if (name == "quadratic") {
    c.T = 0.5;
  } else if (name == "moving-optimum") {
    c.r0 = 2.0;
    c.x0 = 1.0;
    c.T = 2.0;
  } else if (name == "jump") {
    c.r0 = 2.0;
    c.r1 = 0.5;
    c.r2 = 0.0;
    c.g = "double-well";
    c.T = 0.5;
  } else if (name == "kernel-gaussian") {
    c.model = "kernel";
    c.g = "soft-well";
    c.T = 1.0;
  } else {
    throw ConfigError(fmt::format("unknown scenario '{}'", name));
  }
  return c;
}

ScenarioConfig parse_config(const std::string& text) {
  std::map<std::string, Item> items;
  std::istringstream in(text);
  std::string raw;
  int line = 0;
  while (std::getline(in, raw)) {
    ++line;
    const auto hash = raw.find('#');
    if (hash != std::string::npos) raw.erase(hash);
    const std::string s = trim(raw);
    if (s.empty()) continue;
    const auto eq = s.find('=');
    if (eq == std::string::npos) {
      throw ConfigError(fmt::format("line {}: expected 'key = value', got '{}'", line, s));
    }
    const std::string key = trim(s.substr(0, eq));
    const std::string value = trim(s.substr(eq + 1));
    if (key.empty()) throw ConfigError(fmt::format("line {}: empty key", line));
    if (key != "scenario" && setters().count(key) == 0) bad(key, line, "unknown key");
    if (items.count(key)) bad(key, line, fmt::format("duplicate (first set on line {})", items[key].line));
    if (value.empty()) bad(key, line, "missing value");
    items[key] = Item{value, line};
  }

  ScenarioConfig c;
  if (auto it = items.find("scenario"); it != items.end()) {
    try {
      c = registry_scenario(it->second.value);
    } catch (const ConfigError& e) {
      bad("scenario", it->second.line, e.what());
    }
  }
  for (const auto& [key, item] : items) {
    if (key == "scenario") continue;
    setters().at(key)(c, key, item);
  }
  validate(c, items);
  return c;
}

ScenarioConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(fmt::format("cannot open config '{}'", path));
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

// ---------------------------------------------------------------------------

ModelSpec build_model(const ScenarioConfig& c) {
  if (c.model == "kernel") {
    return ModelSpec::kernel(
        RateFunction::gaussian_bump(c.b_amp, c.b_width, c.b_decay, c.b_floor),
        RateFunction::affine_in_I(c.d0, c.d_I), KernelTransform::gaussian(c.sigma));
  }
  auto R = RateFunction::quadratic_family(c.r0, c.r1, c.r2, c.x0, c.c_I);
  if (c.model == "tabulated") {
    return ModelSpec::tabulated(R, TabulatedProfile::load(c.profile), c.theta_coeff, c.c_theta);
  }
  return ModelSpec::quadratic(R);
}

InitialData build_initial_data(const ScenarioConfig& c) {
  InitialData g;
  if (c.g == "quadratic-well") {
    g = InitialData::quadratic_well(c.g_center, c.g_scale);
  } else if (c.g == "shifted-well") {
    g = InitialData::shifted_well(c.g_center == 0.0 ? 3.0 : c.g_center, c.g_scale);
  } else if (c.g == "double-well") {
    g = InitialData::double_well(c.g_left, c.g_right, c.g_offset);
  } else if (c.g == "soft-well") {
    g = InitialData::soft_well(c.g_center, c.g_scale);
  } else {
    g = InitialData::tabulated(c.g_table);
  }
  if (c.g_lift != 0.0) {
    auto f = g.raw;
    const double lift = c.g_lift;
    g.raw = [f, lift](double x) { return f(x) + lift; };
    g.name += fmt::format(" + {}", lift);
  }
  return g;
}

Weight build_psi(const ScenarioConfig& c) {
  if (!c.psi_table.empty()) {
    auto t = InitialData::tabulated(c.psi_table);
    return [t](double x) { return t(x); };
  }
  const double v = c.psi;
  return [v](double) { return v; };
}

BuiltScenario build_scenario(const ScenarioConfig& c, double refine) {
  if (!(refine > 0.0)) throw ConfigError(fmt::format("refinement {} must be positive", refine));
  BuiltScenario out{Problem{c.name, build_model(c), build_initial_data(c)}};
  Problem& p = out.problem;
  p.T = c.T;
  p.multiplier.bracket = {c.I_min, c.I_max};
  p.multiplier.tol_constraint = c.tol_constraint;
  p.multiplier.bracket_width = c.bracket_width;
  p.multiplier.allow_negative = c.allow_negative;

  // Truncation sees g normalized by its global minimum.
  InitialData g0 = p.g;
  g0.shift = g0.raw(locate_argmin(g0));
  TruncationParams tp;
  tp.margin = c.margin;
  tp.safety = c.safety;
  tp.n_cells = c.n_cells;
  tp.I_lo = c.I_min;
  tp.I_hi = c.I_max;
  if (c.domain_lo) {
    out.truncation.grid = GridSpec::uniform(*c.domain_lo, *c.domain_hi, c.n_cells);
    out.truncation.center = 0.5 * (*c.domain_lo + *c.domain_hi);
    out.truncation.radius = 0.5 * (*c.domain_hi - *c.domain_lo);
    out.truncation.growth_constant =
        estimate_growth_constant(p.model, c.I_min, c.I_max, *c.domain_lo, *c.domain_hi);
  } else {
    out.truncation = truncate_domain(g0, p.model, c.T, tp);
  }
  const int n = static_cast<int>(std::lround(c.n_cells * refine));
  if (n < 2) throw ConfigError(fmt::format("refinement {} leaves fewer than 2 cells", refine));
  p.grid = GridSpec::uniform(out.truncation.grid.lo, out.truncation.grid.hi, n);
  p.boundary_cells = static_cast<int>(std::ceil(5.0 * c.safety));

  // min g = 0 on the grid
  double m = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < p.grid.n_nodes(); ++i) m = std::min(m, p.g.raw(p.grid.node(i)));
  p.g.shift = m;
  out.g_shift = m;

  if (c.snapshots.empty()) {
    for (int k = 1; k <= 5; ++k) p.snapshot_times.push_back(c.T * k / 5.0);
  } else {
    p.snapshot_times = c.snapshots;
  }

  out.sl_dt = c.sl_dt ? *c.sl_dt / refine : c.T / 400.0 * (800.0 / n);
  out.tol_action = c.tol_action ? *c.tol_action : 5.0 * (out.sl_dt + p.grid.h());
  out.psi = build_psi(c);
  for (std::size_t i = 0; i < p.grid.n_nodes(); ++i) {
    const double w = out.psi(p.grid.node(i));
    if (!(w > 0.0) || !std::isfinite(w)) {
      throw ConfigError(fmt::format("psi must be positive and finite; psi({}) = {}",
                                    p.grid.node(i), w));
    }
  }
  return out;
}

// ---------------------------------------------------------------------------

namespace {

DiagnosticEntry named_entry(std::string name) {
  DiagnosticEntry e;
  e.name = std::move(name);
  return e;
}

DiagnosticEntry from_assumption(const AssumptionEntry& a) {
  DiagnosticEntry e;
  e.name = "assumption_" + a.name;
  e.applicable = a.applicable;
  e.passed = a.passed;
  e.value = a.worst;
  e.tolerance = a.tolerance;
  e.witness_time = a.witness_I;
  e.witness_x = a.witness_x;
  e.witness_value = a.witness_pv;
  e.note = a.note;
  return e;
}

struct Artifacts {
  std::filesystem::path dir;
  nlohmann::json files = nlohmann::json::object();

  std::string add(const std::string& key, const std::string& file) {
    files[key] = file;
    return (dir / file).string();
  }
};

}  // namespace

ScenarioOutcome run_scenario(const ScenarioConfig& config, const RunOptions& options) {
  ScenarioOutcome out;
  const auto routes = options.routes.empty() ? config.routes : options.routes;
  auto log = [&](int level, const std::string& msg) {
    if (options.verbosity >= level) fmt::print(stderr, "[{}] {}\n", config.name, msg);
  };

  BuiltScenario built = build_scenario(config, options.refine);
  const Problem& problem = built.problem;

  Artifacts art;
  art.dir = options.output.value_or(config.output);
  std::filesystem::create_directories(art.dir);

  nlohmann::json report;
  report["version"] = "0.1.0";
  report["scenario"] = config.name;
  report["registry_entry"] = config.scenario;
  report["model"] = to_string(problem.model.kind());
  report["initial_data"] = problem.g.name;
  report["g_shift"] = built.g_shift;
  report["T"] = problem.T;
  report["grid"] = {{"lo", problem.grid.lo}, {"hi", problem.grid.hi},
                    {"n_cells", problem.grid.n_cells}, {"h", problem.grid.h()}};
  report["truncation"] = {{"center", built.truncation.center},
                          {"radius", built.truncation.radius},
                          {"growth_constant", built.truncation.growth_constant}};
  report["refine"] = options.refine;
  report["routes"] = routes;
  report["tolerances"] = {{"tol_constraint", config.tol_constraint},
                          {"bracket_width", config.bracket_width},
                          {"tol_dual", config.tol_dual},
                          {"tol_action", built.tol_action}};
  report["multiplier_bracket"] = {config.I_min, config.I_max};

  // Assumption gate.
  AssumptionBox box;
  box.I_lo = config.I_min;
  box.I_hi = config.I_max;
  box.x_center = 0.5 * (problem.grid.lo + problem.grid.hi);
  box.x_radius = 0.5 * (problem.grid.hi - problem.grid.lo);
  box.lattice = config.check_lattice;
  if (problem.model.kind() == ModelKind::kernel) box.p_radius = 4.0;
  const AssumptionReport assumptions = check_assumptions(problem.model, box, config.tol_dual);
  report["assumption_box"] = {{"I", {box.I_lo, box.I_hi}}, {"I_kind", assumptions.I_box_kind},
                              {"x", {box.x_center - box.x_radius, box.x_center + box.x_radius}},
                              {"v_radius", box.v_radius}, {"p_radius", box.p_radius},
                              {"lattice", box.lattice}};
  for (const auto& a : assumptions.entries) out.diagnostics.add(from_assumption(a));
  const bool l5 = [&] {
    const auto* e = assumptions.find("L5");
    return e != nullptr && e->passed;
  }();

  auto finish = [&] {
    nlohmann::json diag = nlohmann::json::array();
    for (const auto& e : out.diagnostics.entries) {
      diag.push_back({{"name", e.name}, {"applicable", e.applicable}, {"passed", e.passed},
                      {"value", e.value}, {"tolerance", e.tolerance},
                      {"witness_time", e.witness_time}, {"witness_x", e.witness_x},
                      {"witness_value", e.witness_value}, {"note", e.note}});
    }
    write_json(art.add("diagnostics", "diagnostics.json"), nlohmann::json{{"entries", diag}});
    report["errors"] = out.errors;
    report["all_passed"] = out.diagnostics.all_passed();
    report["files"] = art.files;
    if (!out.errors.empty() || !out.diagnostics.all_passed()) out.exit_code = 1;
    report["exit_code"] = out.exit_code;
    out.report_path = (art.dir / "report.json").string();
    write_json(out.report_path, report);
    return out;
  };

  if (assumptions.hard_failure()) {
    out.errors.push_back("assumption gate: a hard assumption (H1, H2, L1, L2) fails; no route was run");
    log(0, out.errors.back());
    return finish();
  }

  const RunResult* fd = nullptr;
  const RunResult* sl = nullptr;
  out.runs.reserve(2);
  for (const auto& route : routes) {
    if (route == "eps") continue;
    try {
      log(1, fmt::format("running route {}", route));
      if (route == "fd") {
        out.runs.push_back(run_fd(problem, parse_fd_scheme(config.fd_scheme)));
      } else {
        out.runs.push_back(run_sl(problem, built.sl_dt, parse_sl_search(config.sl_search)));
      }
    } catch (const std::exception& e) {
      out.errors.push_back(e.what());
      log(0, fmt::format("route {} failed: {}", route, e.what()));
    }
  }
  for (const auto& r : out.runs) (r.route == "fd" ? fd : sl) = &r;

  const double pess_tol = 2.0 * (config.tol_constraint + config.bracket_width);
  for (const auto& r : out.runs) {
    nlohmann::json snaps = nlohmann::json::array();
    for (std::size_t k = 0; k < r.snapshots.size(); ++k) {
      const auto file = fmt::format("{}_u_{:03d}.csv", r.route, k);
      write_field_csv((art.dir / file).string(), r.snapshots[k]);
      snaps.push_back({{"t", r.snapshots[k].time}, {"file", file}});
    }
    art.files[r.route + "_snapshots"] = snaps;
    write_path_csv(art.add(r.route + "_multiplier", r.route + "_I.csv"), r.path);

    auto pe = check_pessimization(r.path, pess_tol, l5);
    pe.name = r.route + "_pessimization";
    out.diagnostics.add(pe);
    auto lb = lower_bound_check(r, problem.g, built.truncation.growth_constant,
                                config.tol_constraint);
    lb.name = r.route + "_lower_bound";
    out.diagnostics.add(lb);
    report["summary"][r.route] = {{"steps", r.path.size()},
                                  {"I_first", r.path.values.empty() ? 0.0 : r.path.values.front()},
                                  {"I_last", r.path.values.empty() ? 0.0 : r.path.values.back()},
                                  {"I_bv", r.path.bv()},
                                  {"jumps", detect_jumps(r.path).size()}};
  }

  if (sl != nullptr && config.trajectories > 0 && problem.T > 0.0) {
    const double centre = 0.5 * (problem.grid.lo + problem.grid.hi);
    std::vector<Trajectory> trajs;
    std::vector<double> endpoints;
    const int m = config.trajectories;
    for (int k = 0; k < m; ++k) {
      const double x = m == 1 ? centre
                              : centre - config.core_radius + 2.0 * config.core_radius * k / (m - 1);
      trajs.push_back(backtrack_trajectory(*sl, problem.model, problem.T, x));
      endpoints.push_back(x);
    }
    write_trajectories_csv(art.add("trajectories", "trajectories.csv"), trajs);

    DiagnosticEntry act = named_entry("sl_action");
    act.tolerance = built.tol_action;
    DiagnosticEntry bvc = named_entry("velocity_bv_constant");
    bvc.tolerance = std::numeric_limits<double>::infinity();
    DiagnosticEntry el = named_entry("euler_lagrange_residual");
    el.tolerance = std::numeric_limits<double>::infinity();
    DiagnosticEntry phi = named_entry("phi_min");
    phi.tolerance = 0.0;
    phi.value = std::numeric_limits<double>::infinity();
    const MultiplierPath& other = fd != nullptr ? fd->path : sl->path;
    for (const auto& tr : trajs) {
      const double gap = std::abs(tr.action - tr.value);
      if (gap > act.value) {
        act.value = gap;
        act.witness_x = tr.endpoint();
        act.witness_time = tr.t();
      }
      bvc.value = std::max(bvc.value, tr.bv_of_velocity / (tr.t() + sl->path.bv(tr.t())));
      el.value = std::max(el.value, euler_lagrange_residual(tr, sl->path, problem.model));
      const auto w = phi_weights(tr, sl->path, other, problem.model);
      if (w.min < phi.value) {
        phi.value = w.min;
        phi.witness_x = tr.endpoint();
      }
    }
    act.passed = act.value <= act.tolerance;
    bvc.passed = std::isfinite(bvc.value);
    bvc.note = "max over endpoints of BV(gamma') / (t + BV(I))";
    el.passed = std::isfinite(el.value);
    el.note = fmt::format("sup over endpoints; dt + h = {}", built.sl_dt + problem.grid.h());
    phi.passed = phi.value > 0.0;
    phi.note = fd != nullptr ? "I1 = sl, I2 = fd" : "I1 = I2 = sl";
    DiagnosticEntry sat = named_entry("velocity_saturation");
    sat.value = static_cast<double>(sl->saturation_count);
    sat.passed = sl->saturation_count == 0;
    sat.note = fmt::format("V_max up to {}", sl->velocity_bound);
    if (!sat.passed) log(0, fmt::format("warning: {} saturated velocity choices", sl->saturation_count));
    for (auto* e : {&act, &bvc, &el, &phi, &sat}) out.diagnostics.add(*e);
  }

  if (fd != nullptr && sl != nullptr) {
    CompareOptions co;
    co.core_radius = config.core_radius;
    for (auto e : compare_runs(*fd, *sl, co)) {
      e.name = "compare_" + e.name;
      out.diagnostics.add(e);
    }
  }

  if (std::find(routes.begin(), routes.end(), "eps") != routes.end()) {
    try {
      log(1, "running route eps");
      const RunResult* ref = fd != nullptr ? fd : sl;
      if (ref != nullptr) {
        std::vector<EpsRunResult> eruns;
        const auto rows = convergence_table(problem, config.eps_list, *ref, built.psi,
                                            config.core_radius, &eruns);
        write_convergence_csv(art.add("convergence", "convergence.csv"), rows);
        for (const auto& er : eruns) {
          write_path_csv(art.add(fmt::format("eps_{}_multiplier", er.eps),
                                 fmt::format("eps_{}_I.csv", er.eps)),
                         er.path);
          DiagnosticEntry pos = named_entry(fmt::format("eps_{}_positive_I", er.eps));
          pos.value = *std::min_element(er.mass.begin(), er.mass.end());
          pos.passed = pos.value > 0.0;
          out.diagnostics.add(pos);
        }
      } else {
        for (double eps : config.eps_list) {
          const auto er = run_eps(problem, eps, built.psi);
          write_path_csv(art.add(fmt::format("eps_{}_multiplier", eps),
                                 fmt::format("eps_{}_I.csv", eps)),
                         er.path);
        }
      }
    } catch (const std::exception& e) {
      out.errors.push_back(e.what());
      log(0, fmt::format("route eps failed: {}", e.what()));
    }
  }
  return finish();
}

}  // namespace chj
