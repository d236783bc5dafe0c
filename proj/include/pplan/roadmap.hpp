#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "pplan/environment.hpp"

namespace pplan {

/// Radical inverse of index (>= 1) in the given prime base.
double halton(std::uint64_t index, unsigned base);

/// First n free (position, yaw) samples of the 4D Halton sequence (bases
/// 2, 3, 5, 7 over x, y, z, yaw). Throws InfeasibleSpace after 100 * n
/// consecutive colliding candidates.
std::vector<PlannerState> sample_free(std::size_t n, const Environment& env);

/// Euclidean distance between positions. Yaw is free.
inline double edge_cost(const PlannerState& u, const PlannerState& v) {
  return (u.position - v.position).norm();
}

struct Edge {
  std::size_t to = 0;
  double cost = 0.0;
};

/// r-disc roadmap. Node 0 is the initial state; neighbor lists are sorted by
/// index and symmetric.
struct Roadmap {
  std::vector<PlannerState> nodes;
  std::vector<std::vector<Edge>> neighbors;
  std::vector<bool> goal;  // goal[i] == node i lies in the goal region
  double r_n = 0.0;
  std::size_t n = 0;

  std::size_t size() const { return nodes.size(); }
  std::size_t edge_count() const;  // undirected
};

/// Builds the roadmap over {x_init} + sample_free(n), appending the goal
/// center when no sample falls inside the goal. Neighbor computation runs on
/// `workers` threads; the output does not depend on that count.
Roadmap build_graph(const Environment& env, std::size_t n, double r_n, const PlannerState& x_init,
                    const GoalRegion& goal, unsigned workers = 1);

/// Fills neighbors (and goal flags) for already-placed nodes.
void connect_nodes(Roadmap& roadmap, const Environment& env, const GoalRegion& goal,
                   unsigned workers = 1);

}  // namespace pplan
