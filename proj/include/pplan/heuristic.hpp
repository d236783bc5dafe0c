#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "pplan/environment.hpp"
#include "pplan/roadmap.hpp"

namespace pplan {

/// Feature-count heuristic constants. Every dt of travel adds dt of drift,
/// each visible feature takes back dt / n_f.
struct HeuristicParams {
  double dt = 0.1;
  std::size_t n_f = 12;
  double nominal_speed = 1.0;
};

/// Per-timestep heuristic increments along one directed edge.
struct EdgeProfile {
  std::vector<double> increments;
};

struct HeuristicRecord {
  Vec3 position = Vec3::Zero();
  Vec3 velocity = Vec3::Zero();
  double yaw = 0.0;
  double rate = 0.0;  // mean localization error rate, per second
};

/// Precomputed heuristic field, queried by weighted nearest neighbors over
/// (position, velocity, yaw).
struct HeuristicMap {
  std::vector<HeuristicRecord> records;
  std::size_t k_nn = 8;
  double w_yaw = 1.0;
};

/// Number of dt steps an edge of this length is split into (at least one).
std::size_t edge_steps(double length, const HeuristicParams& hp);

/// State at arc length s along u -> v with shortest-direction yaw blending.
PlannerState interpolate_state(const PlannerState& u, const PlannerState& v, double s);

/// Increments for u -> v. Steps sit at the start of each dt interval; the
/// terminal state belongs to the next edge. With a map the increment is
/// rate * dt, otherwise dt - k * dt / n_f for k visible features.
EdgeProfile edge_profile(const PlannerState& u, const PlannerState& v, const Environment& env,
                         const VisibilityParams& vp, const HeuristicParams& hp,
                         const HeuristicMap* map = nullptr);

/// h <- max(0, h + increment), left to right. The clamp makes this
/// non-additive across edges, so callers must fold in path order.
double fold_heuristic(double h0, std::span<const double> increments);

inline double fold_heuristic(double h0, const EdgeProfile& profile) {
  return fold_heuristic(h0, std::span<const double>(profile.increments));
}

/// Inverse-distance-weighted rate over the k_nn nearest records.
double map_rate(const PlannerState& s, const Vec3& velocity, const HeuristicMap& hm);

/// profiles[v][k] belongs to the directed edge v -> roadmap.neighbors[v][k].
using ProfileTable = std::vector<std::vector<EdgeProfile>>;

ProfileTable profiles_for_roadmap(const Roadmap& roadmap, const Environment& env,
                                  const VisibilityParams& vp, const HeuristicParams& hp,
                                  const HeuristicMap* map = nullptr, unsigned workers = 1);

}  // namespace pplan
