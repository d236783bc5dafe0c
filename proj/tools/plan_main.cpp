#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "pplan/errors.hpp"
#include "pplan/pipeline.hpp"
#include "pplan/scenario.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Perception-aware motion planning with Monte Carlo certification"};
  std::string scenario_path;
  std::string mode;
  unsigned workers = 1;
  std::string out_dir = ".";
  app.add_option("scenario", scenario_path, "Scenario JSON file")->required();
  app.add_option("--mode", mode, "explore | verify | refine (overrides the file)")
      ->check(CLI::IsMember({"explore", "explore-only", "verify", "refine"}));
  app.add_option("--workers", workers, "Worker threads for the parallel phases")
      ->check(CLI::PositiveNumber);
  app.add_option("--out", out_dir, "Output directory");

  CLI11_PARSE(app, argc, argv);

  try {
    const pplan::Scenario scenario = pplan::load_scenario(scenario_path);
    pplan::RunOptions options;
    if (!mode.empty()) options.mode = pplan::parse_mode(mode);
    options.workers = workers;
    options.out_dir = out_dir;
    const int code = pplan::run(scenario, options);
    switch (code) {
      case pplan::kExitOk:
        break;
      case pplan::kExitNoPlan:
        std::cerr << "no feasible plan\n";
        break;
      case pplan::kExitMcFail:
        std::cerr << "Monte Carlo verification failed\n";
        break;
      default:
        break;
    }
    return code;
  } catch (const pplan::ParseError& e) {
    std::cerr << "parse error: " << e.what() << '\n';
  } catch (const pplan::ValidationError& e) {
    std::cerr << "invalid scenario: " << e.what() << '\n';
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
  }
  return pplan::kExitError;
}
