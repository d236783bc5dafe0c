#pragma once

#include <Eigen/Core>
#include <cstddef>
#include <filesystem>
#include <limits>
#include <optional>
#include <string>

#include "json.hpp"

#include "pplan/environment.hpp"
#include "pplan/heuristic.hpp"
#include "pplan/montecarlo.hpp"

namespace pplan {

enum class Mode { Explore, Verify, Refine };
enum class HeuristicSource { FeatureCount, Map };

const char* to_string(Mode mode);
Mode parse_mode(const std::string& text);

struct PlannerConfig {
  std::size_t n = 0;
  double r_n = 0.0;
  double epsilon = 0.5;
  double beta = std::numeric_limits<double>::infinity();
  std::optional<double> beta_max;
  HeuristicParams heuristic;
  VisibilityParams visibility;
};

struct HeuristicConfig {
  HeuristicSource source = HeuristicSource::FeatureCount;
  std::string path;  // map file, relative to the scenario file
  std::size_t k_nn = 8;
  double w_yaw = 1.0;
};

struct McConfig {
  std::size_t trials = 1000;
  std::optional<double> delta_xhat;
  std::optional<double> alpha;
  std::optional<double> sigma_imu;
  std::optional<double> sigma_vis;
  std::optional<double> dt_sim;  // defaults to planner dt
  std::uint64_t rng_seed = 1;
  Vec3 u_max = Vec3::Constant(10.0);
  Eigen::Matrix2d Q = Eigen::Matrix2d::Identity();
  double R = 1.0;
  std::size_t max_iters = 8;
};

struct Scenario {
  Mode mode = Mode::Explore;
  Environment env;
  PlannerState start;
  GoalRegion goal;
  PlannerConfig planner;
  HeuristicConfig heuristic;
  McConfig mc;
  std::filesystem::path base_dir;  // resolves relative paths

  double dt_sim() const { return mc.dt_sim.value_or(planner.heuristic.dt); }
  NoiseModel noise() const;
  VehicleModel vehicle() const;
  VerifyParams verify_params() const;
};

/// Parses and validates. Unknown keys are rejected. Throws ParseError
/// (with line or field) or ValidationError (naming the invariant).
Scenario load_scenario(const std::filesystem::path& path);
Scenario parse_scenario(const std::string& text, const std::filesystem::path& base_dir = {});
Scenario scenario_from_json(const nlohmann::json& doc, const std::filesystem::path& base_dir = {});

/// Checks every invariant plus the fields required by `mode`.
void validate(const Scenario& s, Mode mode);

nlohmann::json scenario_to_json(const Scenario& s);
void write_scenario(const Scenario& s, const std::filesystem::path& path);

/// Heuristic map file: JSON array of {position, velocity, yaw, rate}.
HeuristicMap load_heuristic_map(const std::filesystem::path& path, std::size_t k_nn,
                                double w_yaw);

}  // namespace pplan
