#pragma once

#include <Eigen/Core>
#include <cstddef>
#include <numbers>
#include <vector>

namespace pplan {

using Vec3 = Eigen::Vector3d;

/// Closed axis-aligned box [lo, hi].
struct Box {
  Vec3 lo = Vec3::Zero();
  Vec3 hi = Vec3::Ones();

  bool contains(const Vec3& p) const {
    return (p.array() >= lo.array()).all() && (p.array() <= hi.array()).all();
  }
  Vec3 center() const { return 0.5 * (lo + hi); }
  bool well_formed() const { return (lo.array() < hi.array()).all(); }
};

using Workspace = Box;
using Obstacle = Box;
using GoalRegion = Box;

/// Planner node: position plus yaw in [-pi, pi).
struct PlannerState {
  Vec3 position = Vec3::Zero();
  double yaw = 0.0;
};

struct VisibilityParams {
  double fov_half_angle = std::numbers::pi / 4.0;
  double max_range = 1e300;
};

/// Mapped world: bounds, box obstacles and landmark features.
struct Environment {
  Workspace workspace;
  std::vector<Obstacle> obstacles;
  std::vector<Vec3> features;

  double diagonal() const { return (workspace.hi - workspace.lo).norm(); }
};

/// Wraps an angle to [-pi, pi).
double wrap_angle(double a);

/// True iff p is inside the workspace and outside every (closed) obstacle.
bool point_free(const Vec3& p, const Environment& env);

/// Exact slab test of the closed segment [a, b] against one closed box.
bool segment_hits_box(const Vec3& a, const Vec3& b, const Box& box);

/// True iff the closed segment [a, b] touches any obstacle.
bool segment_collides(const Vec3& a, const Vec3& b, const Environment& env);

/// Indices (ascending) of features within range, inside the 3D view cone
/// around (cos yaw, sin yaw, 0), and not occluded by an obstacle.
std::vector<std::size_t> visible_features(const PlannerState& s, const Environment& env,
                                          const VisibilityParams& vp);

/// Buffer-reusing variant; `out` is cleared first.
void visible_features(const PlannerState& s, const Environment& env, const VisibilityParams& vp,
                      std::vector<std::size_t>& out);

/// Same test as visible_features but only counts.
std::size_t count_visible_features(const PlannerState& s, const Environment& env,
                                   const VisibilityParams& vp);

inline bool in_goal(const Vec3& p, const GoalRegion& g) { return g.contains(p); }

}  // namespace pplan
