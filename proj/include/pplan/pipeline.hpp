#pragma once

#include <filesystem>
#include <optional>

#include "pplan/scenario.hpp"

namespace pplan {

struct RunOptions {
  std::optional<Mode> mode;  // overrides the scenario's mode
  unsigned workers = 1;
  std::filesystem::path out_dir = ".";
};

enum ExitCode : int { kExitOk = 0, kExitError = 1, kExitNoPlan = 2, kExitMcFail = 3 };

/// Graph building, heuristic precomputation, search and (per mode) Monte
/// Carlo certification. Writes solution.json, pareto.json, trials.csv and
/// summary.json into out_dir and returns the process exit code.
int run(const Scenario& scenario, const RunOptions& options);

}  // namespace pplan
