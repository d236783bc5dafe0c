#include "pplan/roadmap.hpp"

#include <algorithm>
#include <numbers>

#include "pplan/errors.hpp"
#include "pplan/parallel.hpp"

namespace pplan {

double halton(std::uint64_t index, unsigned base) {
  double f = 1.0;
  double r = 0.0;
  while (index > 0) {
    f /= base;
    r += f * static_cast<double>(index % base);
    index /= base;
  }
  return r;
}

std::vector<PlannerState> sample_free(std::size_t n, const Environment& env) {
  constexpr unsigned kBases[4] = {2, 3, 5, 7};
  const Vec3 span = env.workspace.hi - env.workspace.lo;
  const std::size_t patience = 100 * std::max<std::size_t>(n, 1);

  std::vector<PlannerState> out;
  out.reserve(n);
  std::size_t misses = 0;
  for (std::uint64_t index = 1; out.size() < n; ++index) {
    PlannerState s;
    for (int axis = 0; axis < 3; ++axis) {
      s.position[axis] = env.workspace.lo[axis] + halton(index, kBases[axis]) * span[axis];
    }
    s.yaw = -std::numbers::pi + 2.0 * std::numbers::pi * halton(index, kBases[3]);
    if (!point_free(s.position, env)) {
      if (++misses >= patience) {
        throw InfeasibleSpace("sample_free: " + std::to_string(misses) +
                              " consecutive samples in collision");
      }
      continue;
    }
    misses = 0;
    out.push_back(s);
  }
  return out;
}

std::size_t Roadmap::edge_count() const {
  std::size_t twice = 0;
  for (const auto& list : neighbors) twice += list.size();
  return twice / 2;
}

void connect_nodes(Roadmap& roadmap, const Environment& env, const GoalRegion& goal,
                   unsigned workers) {
  const auto& nodes = roadmap.nodes;
  const std::size_t count = nodes.size();
  roadmap.neighbors.assign(count, {});
  roadmap.goal.assign(count, false);
  for (std::size_t i = 0; i < count; ++i) roadmap.goal[i] = in_goal(nodes[i].position, goal);

  parallel_for(count, workers, [&](std::size_t v) {
    auto& list = roadmap.neighbors[v];
    for (std::size_t u = 0; u < count; ++u) {
      if (u == v) continue;
      // canonical (low, high) orientation keeps both directions bit-identical
      const std::size_t lo = std::min(u, v);
      const std::size_t hi = std::max(u, v);
      const double cost = edge_cost(nodes[lo], nodes[hi]);
      if (!(cost < roadmap.r_n)) continue;
      if (segment_collides(nodes[lo].position, nodes[hi].position, env)) continue;
      list.push_back({u, cost});
    }
  });
}

Roadmap build_graph(const Environment& env, std::size_t n, double r_n, const PlannerState& x_init,
                    const GoalRegion& goal, unsigned workers) {
  Roadmap roadmap;
  roadmap.r_n = r_n;
  roadmap.n = n;
  roadmap.nodes.reserve(n + 2);
  roadmap.nodes.push_back(x_init);

  bool sampled_goal = false;
  for (const auto& s : sample_free(n, env)) {
    sampled_goal = sampled_goal || in_goal(s.position, goal);
    roadmap.nodes.push_back(s);
  }
  if (!sampled_goal) {
    const Vec3 center = goal.center();
    if (!point_free(center, env)) {
      throw NoGoalSample("build_graph: no sample in goal and goal center is in collision");
    }
    roadmap.nodes.push_back({center, 0.0});
  }

  connect_nodes(roadmap, env, goal, workers);
  return roadmap;
}

}  // namespace pplan
