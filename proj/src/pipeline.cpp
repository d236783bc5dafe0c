#include "pplan/pipeline.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>

#include "pplan/errors.hpp"
#include "pplan/explore.hpp"
#include "pplan/roadmap.hpp"

namespace pplan {

using nlohmann::json;

namespace {

class PhaseTimer {
 public:
  double lap_ms() {
    const auto now = std::chrono::steady_clock::now();
    const double ms = std::chrono::duration<double, std::milli>(now - last_).count();
    last_ = now;
    return ms;
  }

 private:
  std::chrono::steady_clock::time_point last_ = std::chrono::steady_clock::now();
};

json vec_json(const Vec3& v) { return json::array({v.x(), v.y(), v.z()}); }

json beta_json(double beta) {
  if (std::isinf(beta)) return "inf";
  return beta;
}

void write_json(const std::filesystem::path& path, const json& doc) {
  std::ofstream out(path);
  out << doc.dump(2) << '\n';
}

json solution_json(const Plan& plan, const Roadmap& roadmap) {
  json states = json::array();
  for (std::size_t id : plan.nodes()) {
    const auto& s = roadmap.nodes[id];
    states.push_back({{"node", id}, {"position", vec_json(s.position)}, {"yaw", s.yaw}});
  }
  return {{"nodes", plan.nodes()}, {"states", states}, {"cost", plan.cost}, {"h", plan.h}};
}

json pareto_json(const ExploreResult& result, const Roadmap& roadmap) {
  json goals = json::array();
  for (std::size_t x = 0; x < roadmap.size(); ++x) {
    if (!roadmap.goal[x]) continue;
    json front = json::array();
    for (const auto& pt : result.fronts[x]) front.push_back(json::array({pt.cost, pt.h}));
    goals.push_back({{"node", x}, {"front", front}});
  }
  return {{"goal_nodes", goals}};
}

void write_trials_csv(const std::filesystem::path& path, const std::vector<TrialResult>& results) {
  std::FILE* f = std::fopen(path.string().c_str(), "w");
  if (f == nullptr) throw std::runtime_error("cannot write " + path.string());
  std::fprintf(f, "trial,max_loc_error,max_deviation\n");
  for (std::size_t i = 0; i < results.size(); ++i) {
    std::fprintf(f, "%zu,%.17g,%.17g\n", i, results[i].max_loc_error, results[i].max_deviation);
  }
  std::fclose(f);
}

}  // namespace

int run(const Scenario& scenario, const RunOptions& options) {
  const Mode mode = options.mode.value_or(scenario.mode);
  validate(scenario, mode);
  std::filesystem::create_directories(options.out_dir);
  const auto& out = options.out_dir;
  const unsigned workers = options.workers;

  json summary;
  summary["mode"] = to_string(mode);
  json timings;
  PhaseTimer timer;

  const Roadmap roadmap = build_graph(scenario.env, scenario.planner.n, scenario.planner.r_n,
                                      scenario.start, scenario.goal, workers);
  timings["graph_build_ms"] = timer.lap_ms();
  summary["nodes"] = roadmap.size();
  summary["edges"] = roadmap.edge_count();

  std::optional<HeuristicMap> map;
  if (scenario.heuristic.source == HeuristicSource::Map) {
    std::filesystem::path path = scenario.heuristic.path;
    if (path.is_relative()) path = scenario.base_dir / path;
    map = load_heuristic_map(path, scenario.heuristic.k_nn, scenario.heuristic.w_yaw);
  }
  const ProfileTable profiles =
      profiles_for_roadmap(roadmap, scenario.env, scenario.planner.visibility,
                           scenario.planner.heuristic, map ? &*map : nullptr, workers);
  timings["heuristic_ms"] = timer.lap_ms();

  const TrackerGains gains = lqr_gain(scenario.mc.Q, scenario.mc.R);
  auto finish = [&](int code) {
    summary["timings"] = timings;
    summary["exit_code"] = code;
    write_json(out / "summary.json", summary);
    return code;
  };

  if (mode == Mode::Refine) {
    RefineProblem problem;
    problem.roadmap = &roadmap;
    problem.profiles = &profiles;
    problem.env = &scenario.env;
    problem.epsilon = scenario.planner.epsilon;
    problem.nominal_speed = scenario.planner.heuristic.nominal_speed;
    problem.vp = scenario.planner.visibility;
    problem.noise = scenario.noise();
    problem.gains = gains;
    problem.vehicle = scenario.vehicle();
    problem.verify = scenario.verify_params();
    problem.workers = workers;

    json history = json::array();
    try {
      const RefineResult refined =
          refine_bound(problem, *scenario.planner.beta_max, scenario.mc.max_iters);
      timings["refine_ms"] = timer.lap_ms();
      for (const auto& step : refined.history) {
        history.push_back({{"beta", step.beta},
                           {"found", step.found},
                           {"cost", step.cost},
                           {"p_hat", step.p_hat},
                           {"pass", step.pass}});
      }
      write_json(out / "solution.json", solution_json(refined.plan, roadmap));
      write_trials_csv(out / "trials.csv", refined.verification.results);
      summary["cost"] = refined.plan.cost;
      summary["h"] = refined.plan.h;
      summary["beta"] = beta_json(refined.beta_final);
      summary["p_hat"] = refined.verification.p_hat;
      summary["p_hat_std_error"] = refined.verification.std_error;
      summary["pass"] = refined.verification.pass;
      summary["refinement"] = history;
      return finish(kExitOk);
    } catch (const NoFeasiblePlan& e) {
      summary["error"] = e.what();
      return finish(kExitNoPlan);
    }
  }

  ExploreParams ep;
  ep.epsilon = scenario.planner.epsilon;
  ep.beta = scenario.planner.beta;
  summary["beta"] = beta_json(ep.beta);
  ExploreResult found;
  try {
    found = explore(roadmap, profiles, ep, workers);
  } catch (const NoFeasiblePlan& e) {
    timings["exploration_ms"] = timer.lap_ms();
    summary["error"] = e.what();
    return finish(kExitNoPlan);
  }
  timings["exploration_ms"] = timer.lap_ms();
  summary["cost"] = found.plan.cost;
  summary["h"] = found.plan.h;
  summary["waves"] = found.waves;
  write_json(out / "solution.json", solution_json(found.plan, roadmap));
  write_json(out / "pareto.json", pareto_json(found, roadmap));

  if (mode == Mode::Explore) return finish(kExitOk);

  const auto traj = nominal_trajectory(found.plan, roadmap,
                                       scenario.planner.heuristic.nominal_speed, scenario.dt_sim());
  const VerifyResult verified =
      mc_verify(traj, scenario.env, scenario.planner.visibility, scenario.noise(), gains,
                scenario.vehicle(), scenario.verify_params(), workers);
  timings["monte_carlo_ms"] = timer.lap_ms();
  write_trials_csv(out / "trials.csv", verified.results);
  summary["p_hat"] = verified.p_hat;
  summary["p_hat_std_error"] = verified.std_error;
  summary["pass"] = verified.pass;
  return finish(verified.pass ? kExitOk : kExitMcFail);
}

}  // namespace pplan
