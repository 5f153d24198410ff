#include <doctest.h>

#include <chj/errors.hpp>
#include <chj/scenario.hpp>

#include <nlohmann/json.hpp>

#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <string>

using namespace chj;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("chj_unit_" + name);
  fs::remove_all(dir);
  return dir;
}

void collect_files(const nlohmann::json& j, std::set<std::string>& out) {
  if (j.is_string()) out.insert(j.get<std::string>());
  if (j.is_object() && j.contains("file")) out.insert(j["file"].get<std::string>());
  if (j.is_array() || (j.is_object() && !j.contains("file"))) {
    for (const auto& item : j) collect_files(item, out);
  }
}

std::string config_error(const std::string& text) {
  try {
    parse_config(text);
  } catch (const ConfigError& e) {
    return e.what();
  }
  return {};
}

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("minimal config gets defaults") {
  const auto c = parse_config("name = mini\nmodel = quadratic\ng = quadratic-well\nT = 0.5\n");
  CHECK(c.name == "mini");
  CHECK(c.n_cells == 800);
  CHECK(c.routes == std::vector<std::string>{"fd", "sl"});
  CHECK(c.T == 0.5);
}

TEST_CASE("registry defaults then overrides") {
  const auto c = parse_config("# jump study\nscenario = jump\nname = j\nn_cells = 400  # coarse\n");
  CHECK(c.g == registry_scenario("jump").g);
  CHECK(c.n_cells == 400);
}

TEST_CASE("initial data offset is recorded") {
  auto c = parse_config("name = lifted\ng_lift = 0.3\nT = 0.1\n");
  const auto built = build_scenario(c);
  CHECK(built.g_shift == doctest::Approx(0.3).epsilon(1e-9));
  CHECK(built.problem.g(built.truncation.center) == doctest::Approx(0.0));
}

TEST_CASE("errors name the key and line") {
  const auto neg = config_error("name = x\nT = -1\n");
  CHECK(neg.find("'T'") != std::string::npos);
  CHECK(neg.find("line 2") != std::string::npos);
  CHECK(config_error("name = x\ncolour = red\n").find("'colour'") != std::string::npos);
  CHECK(config_error("name = x\nn_cells = many\n").find("'n_cells'") != std::string::npos);
  CHECK(config_error("name = x\nT = 1\nT = 2\n").find("line 3") != std::string::npos);
  CHECK_FALSE(config_error("name = x\nscenario = nowhere\n").empty());
}

TEST_CASE("assumption gate stops a run before stepping") {
  auto c = parse_config("name = flat\nc_I = 0\nT = 0.2\nn_cells = 100\n");
  RunOptions o;
  o.output = scratch("gate").string();
  const auto out = run_scenario(c, o);
  CHECK(out.exit_code != 0);
  CHECK(out.runs.empty());
  const auto* l2 = out.diagnostics.find("assumption_L2");
  REQUIRE(l2 != nullptr);
  CHECK_FALSE(l2->passed);
}

TEST_CASE("quadratic scenario passes and reruns are byte-identical") {
  auto c = registry_scenario("quadratic");
  c.name = "quadratic";
  c.n_cells = 200;
  c.trajectories = 5;
  RunOptions a, b;
  a.output = scratch("run_a").string();
  b.output = scratch("run_b").string();
  const auto ra = run_scenario(c, a);
  for (const auto& e : ra.diagnostics.entries) CHECK_MESSAGE(e.passed, e.name << ": " << e.note);
  CHECK(ra.exit_code == 0);
  run_scenario(c, b);

  const auto report = nlohmann::json::parse(slurp(ra.report_path));
  REQUIRE(report.contains("files"));
  std::set<std::string> referenced;
  collect_files(report["files"], referenced);
  std::size_t csv = 0;
  for (const auto& entry : fs::directory_iterator(*a.output)) {
    const auto name = entry.path().filename().string();
    if (name == "report.json") continue;
    CHECK_MESSAGE(referenced.count(name) == 1, name);
    if (entry.path().extension() == ".csv") {
      ++csv;
      CHECK_MESSAGE(slurp(entry.path()) == slurp(fs::path(*b.output) / name), name);
    }
  }
  CHECK(csv > 0);
}

}
