#pragma once

#include <cstddef>
#include <limits>
#include <span>
#include <vector>

#include "pplan/heuristic.hpp"
#include "pplan/roadmap.hpp"

namespace pplan {

/// Partial motion plan: head node, its ancestors from node 0, accumulated
/// edge cost and folded perception heuristic.
struct Plan {
  std::size_t head = 0;
  std::vector<std::size_t> path;
  double cost = 0.0;
  double h = 0.0;

  /// Ancestors followed by the head.
  std::vector<std::size_t> nodes() const;
};

struct ExploreParams {
  double epsilon = 0.5;  // group cost factor in (0, 1]
  double beta = std::numeric_limits<double>::infinity();
  // When false the goal test is skipped and the search runs until the open
  // set is empty, leaving the complete Pareto front at every node.
  bool stop_at_goal = true;
};

/// Strictly cheaper and no worse on the heuristic. Heads must match.
inline bool dominates(const Plan& p_dom, const Plan& p) {
  return p.cost > p_dom.cost && p.h >= p_dom.h;
}

/// floor(cost / (epsilon * r_n)); buckets are half-open.
std::size_t bucket_index(double cost, double epsilon, double r_n);

struct Label {
  double cost = 0.0;
  double h = 0.0;
  bool open = true;
};

/// Indices (ascending) of open labels dominated by some label of the same
/// set. Independent of input order.
std::vector<std::size_t> find_dominated(std::span<const Label> same_head);

struct StoredPlan {
  Plan plan;
  bool open = true;
};

/// Plan sets P(x) indexed by head; `open` marks membership of P_open.
using PlanSets = std::vector<std::vector<StoredPlan>>;

/// Drops every open plan dominated by a plan with the same head.
void remove_dominated(PlanSets& sets);

struct FrontPoint {
  double cost = 0.0;
  double h = 0.0;
  friend bool operator==(const FrontPoint&, const FrontPoint&) = default;
};

struct ExploreResult {
  Plan plan;
  // Non-dominated (cost, h) pairs of P(x) at termination, sorted by cost.
  std::vector<std::vector<FrontPoint>> fronts;
  std::size_t waves = 0;
  std::size_t plans_created = 0;
};

/// Grouped multiobjective search from node 0. Throws NoFeasiblePlan when no
/// goal plan with h <= beta exists at termination. The returned plan has
/// minimum cost, then minimum h, then the lexicographically smallest node
/// sequence, and does not depend on `workers`.
ExploreResult explore(const Roadmap& roadmap, const ProfileTable& profiles,
                      const ExploreParams& params, unsigned workers = 1);

}  // namespace pplan
