// Command-line driver: run one scenario configuration and write artifacts.

#include <exception>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "chj/errors.hpp"
#include "chj/scenario.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Constrained Hamilton-Jacobi solver"};
  std::string config_path;
  std::string output;
  double refine = 1.0;
  std::vector<std::string> routes;
  int verbose = 0;

  app.add_option("config", config_path, "Scenario configuration file")->required();
  app.add_option("-o,--output", output, "Output directory (overrides the config)");
  app.add_option("-r,--refine", refine, "Grid refinement multiplier")
      ->check(CLI::PositiveNumber);
  app.add_option("--routes", routes, "Routes to run (fd, sl, eps)")
      ->delimiter(',')
      ->check(CLI::IsMember({"fd", "sl", "eps"}));
  app.add_flag("-v,--verbose", verbose, "Increase verbosity");
  CLI11_PARSE(app, argc, argv);

  try {
    const chj::ScenarioConfig config = chj::load_config(config_path);
    chj::RunOptions opts;
    if (!output.empty()) opts.output = output;
    opts.refine = refine;
    opts.routes = routes;
    opts.verbosity = verbose;
    const auto outcome = chj::run_scenario(config, opts);
    for (const auto& e : outcome.diagnostics.entries) {
      if (e.applicable && !e.passed) {
        fmt::print(stderr, "FAILED {}: value {} (tolerance {}) {}\n", e.name, e.value,
                   e.tolerance, e.note);
      }
    }
    for (const auto& e : outcome.errors) fmt::print(stderr, "error: {}\n", e);
    fmt::print("{}\n", outcome.report_path);
    return outcome.exit_code;
  } catch (const chj::ConfigError& e) {
    fmt::print(stderr, "configuration error: {}\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return 1;
  }
}
