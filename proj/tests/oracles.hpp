#pragma once
// Independent reference computations used only by the tests. None of these
// call into the code paths they are used to check.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <queue>
#include <random>
#include <utility>
#include <vector>

#include "pplan/environment.hpp"
#include "pplan/explore.hpp"
#include "pplan/roadmap.hpp"

namespace pplan::oracle {

inline bool point_in_closed_box(const Vec3& p, const Box& b) {
  for (int i = 0; i < 3; ++i) {
    if (p[i] < b.lo[i] || p[i] > b.hi[i]) return false;
  }
  return true;
}

/// Dense sampling of the segment at `samples` evenly spaced points.
inline bool segment_hits_by_sampling(const Vec3& a, const Vec3& b, const std::vector<Box>& boxes,
                                     int samples = 1000) {
  for (int k = 0; k < samples; ++k) {
    const double t = static_cast<double>(k) / (samples - 1);
    const Vec3 p = a + t * (b - a);
    for (const auto& box : boxes) {
      if (point_in_closed_box(p, box)) return true;
    }
  }
  return false;
}

inline double reference_fold(double h, const std::vector<double>& inc) {
  for (double x : inc) h = (h + x < 0.0) ? 0.0 : h + x;
  return h;
}

/// Textbook Dijkstra over the roadmap; returns the distance to the nearest
/// goal node or +inf.
inline double dijkstra_to_goal(const Roadmap& g) {
  std::vector<double> dist(g.size(), std::numeric_limits<double>::infinity());
  using Item = std::pair<double, std::size_t>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> pq;
  dist[0] = 0.0;
  pq.push({0.0, 0});
  while (!pq.empty()) {
    auto [d, u] = pq.top();
    pq.pop();
    if (d > dist[u]) continue;
    if (g.goal[u]) return d;
    for (const auto& e : g.neighbors[u]) {
      if (d + e.cost < dist[e.to]) {
        dist[e.to] = d + e.cost;
        pq.push({dist[e.to], e.to});
      }
    }
  }
  return std::numeric_limits<double>::infinity();
}

struct WalkValue {
  std::vector<std::size_t> nodes;
  double cost;
  double h;
};

/// Every walk from node 0 with at most max_edges edges that ends at `target`,
/// with cost and folded h accumulated in path order.
inline std::vector<WalkValue> enumerate_walks(const Roadmap& g, const ProfileTable& profiles,
                                              std::size_t target, std::size_t max_edges,
                                              double beta) {
  std::vector<WalkValue> out;
  std::vector<std::size_t> stack{0};
  std::function<void(std::size_t, double, double)> rec = [&](std::size_t u, double c, double h) {
    if (u == target) out.push_back({stack, c, h});
    if (stack.size() - 1 == max_edges) return;
    for (std::size_t k = 0; k < g.neighbors[u].size(); ++k) {
      const auto& e = g.neighbors[u][k];
      const double h2 = reference_fold(h, profiles[u][k].increments);
      if (h2 > beta) continue;  // every prefix must respect the bound
      stack.push_back(e.to);
      rec(e.to, c + e.cost, h2);
      stack.pop_back();
    }
  };
  rec(0, 0.0, 0.0);
  return out;
}

/// O(n^2) Pareto filter with the strict-cost / non-strict-h rule.
inline std::vector<FrontPoint> pareto_filter(const std::vector<FrontPoint>& pts) {
  std::vector<FrontPoint> out;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    bool dominated = false;
    for (std::size_t j = 0; j < pts.size() && !dominated; ++j) {
      dominated = pts[i].cost > pts[j].cost && pts[i].h >= pts[j].h;
    }
    if (!dominated) out.push_back(pts[i]);
  }
  std::sort(out.begin(), out.end(), [](const FrontPoint& a, const FrontPoint& b) {
    return a.cost != b.cost ? a.cost < b.cost : a.h < b.h;
  });
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

/// Closed-form CARE gain for the double integrator with Q = diag(q1, q2).
inline std::pair<double, double> double_integrator_gain(double q1, double q2, double r) {
  const double k1 = std::sqrt(q1 / r);
  const double k2 = std::sqrt((q2 + 2.0 * std::sqrt(q1 * r)) / r);
  return {k1, k2};
}

/// Per-axis variance of dead-reckoned position error after `steps`
/// semi-implicit Euler steps driven by white accelerometer noise.
inline double imu_position_variance(double sigma, double dt, std::size_t steps) {
  const double k = static_cast<double>(steps);
  return sigma * sigma * std::pow(dt, 4) * k * (k + 1.0) * (2.0 * k + 1.0) / 6.0;
}

/// P(|X| >= r) for X ~ N(0, s^2 I_3): chi distribution with 3 dof.
inline double gaussian3_exceedance(double r, double s) {
  const double x = r / s;
  return std::erfc(x / std::sqrt(2.0)) + std::sqrt(2.0 / M_PI) * x * std::exp(-0.5 * x * x);
}

/// Random roadmap on points in the unit cube with r-disc edges (no
/// obstacles). Node `goal_node` is the only goal.
inline Roadmap random_geometric_graph(std::mt19937_64& rng, std::size_t nodes, double radius,
                                      std::size_t goal_node) {
  std::uniform_real_distribution<double> U(0.0, 1.0);
  Roadmap g;
  g.r_n = radius;
  g.n = nodes;
  for (std::size_t i = 0; i < nodes; ++i) {
    g.nodes.push_back({Vec3(U(rng), U(rng), U(rng)), 0.0});
  }
  g.neighbors.assign(nodes, {});
  g.goal.assign(nodes, false);
  g.goal[goal_node] = true;
  for (std::size_t i = 0; i < nodes; ++i) {
    for (std::size_t j = 0; j < nodes; ++j) {
      if (i == j) continue;
      const std::size_t lo = std::min(i, j), hi = std::max(i, j);
      const double d = (g.nodes[lo].position - g.nodes[hi].position).norm();
      if (d < radius) g.neighbors[i].push_back({j, d});
    }
  }
  return g;
}

}  // namespace pplan::oracle
