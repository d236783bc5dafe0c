#include "pplan/explore.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <optional>

#include "pplan/errors.hpp"
#include "pplan/parallel.hpp"

namespace pplan {

std::vector<std::size_t> Plan::nodes() const {
  std::vector<std::size_t> out = path;
  out.push_back(head);
  return out;
}

std::size_t bucket_index(double cost, double epsilon, double r_n) {
  return static_cast<std::size_t>(std::floor(cost / (epsilon * r_n)));
}

std::vector<std::size_t> find_dominated(std::span<const Label> same_head) {
  std::vector<std::size_t> order(same_head.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    const auto& la = same_head[a];
    const auto& lb = same_head[b];
    if (la.cost != lb.cost) return la.cost < lb.cost;
    if (la.h != lb.h) return la.h < lb.h;
    return a < b;
  });

  std::vector<std::size_t> out;
  double best_h_cheaper = std::numeric_limits<double>::infinity();
  std::size_t i = 0;
  while (i < order.size()) {
    // labels of equal cost cannot dominate each other
    std::size_t j = i;
    double best_h_tie = std::numeric_limits<double>::infinity();
    while (j < order.size() && same_head[order[j]].cost == same_head[order[i]].cost) {
      const auto& l = same_head[order[j]];
      if (l.open && best_h_cheaper <= l.h) out.push_back(order[j]);
      best_h_tie = std::min(best_h_tie, l.h);
      ++j;
    }
    best_h_cheaper = std::min(best_h_cheaper, best_h_tie);
    i = j;
  }
  std::sort(out.begin(), out.end());
  return out;
}

void remove_dominated(PlanSets& sets) {
  for (auto& set : sets) {
    std::vector<Label> labels;
    labels.reserve(set.size());
    for (const auto& s : set) labels.push_back({s.plan.cost, s.plan.h, s.open});
    const auto doomed = find_dominated(labels);
    if (doomed.empty()) continue;
    std::vector<StoredPlan> kept;
    kept.reserve(set.size() - doomed.size());
    std::size_t d = 0;
    for (std::size_t k = 0; k < set.size(); ++k) {
      if (d < doomed.size() && doomed[d] == k) {
        ++d;
        continue;
      }
      kept.push_back(std::move(set[k]));
    }
    set = std::move(kept);
  }
}

namespace {

constexpr std::size_t kNoParent = static_cast<std::size_t>(-1);

struct PlanNode {
  std::size_t head;
  std::size_t parent;
  double cost;
  double h;
  bool open;
};

struct Child {
  std::size_t head;
  double cost;
  double h;
};

class Search {
 public:
  Search(const Roadmap& roadmap, const ProfileTable& profiles, const ExploreParams& params,
         unsigned workers)
      : roadmap_(roadmap),
        profiles_(profiles),
        params_(params),
        workers_(workers),
        width_(params.epsilon * roadmap.r_n),
        stored_(roadmap.size()) {}

  ExploreResult run() {
    add_plan(0, kNoParent, 0.0, 0.0);
    std::size_t wave = 0;
    std::vector<std::size_t> group = next_group(wave);
    while (open_count_ > 0 && !(params_.stop_at_goal && group_reaches_goal(group))) {
      expand(group);
      for (std::size_t id : group) close(id);
      ++wave;
      group = next_group(wave);
    }

    ExploreResult result;
    result.waves = wave;
    result.plans_created = arena_.size();
    result.fronts = fronts();
    const auto best = best_goal_plan();
    if (!best) {
      throw NoFeasiblePlan("explore: no goal plan with h <= beta");
    }
    result.plan = to_plan(*best);
    return result;
  }

 private:
  std::size_t add_plan(std::size_t head, std::size_t parent, double cost, double h) {
    const std::size_t id = arena_.size();
    arena_.push_back({head, parent, cost, h, true});
    stored_[head].push_back(id);
    const std::size_t b = bucket_index(cost, params_.epsilon, roadmap_.r_n);
    if (b >= buckets_.size()) buckets_.resize(b + 1);
    buckets_[b].push_back(id);
    first_bucket_ = std::min(first_bucket_, b);
    ++open_count_;
    return id;
  }

  void close(std::size_t id) {
    if (arena_[id].open) {
      arena_[id].open = false;
      --open_count_;
    }
  }

  bool group_reaches_goal(const std::vector<std::size_t>& group) const {
    return std::any_of(group.begin(), group.end(), [&](std::size_t id) {
      return roadmap_.goal[arena_[id].head] && arena_[id].h <= params_.beta;
    });
  }

  void expand(const std::vector<std::size_t>& group) {
    std::vector<std::vector<Child>> children(group.size());
    parallel_for(group.size(), workers_, [&](std::size_t g) {
      const PlanNode& p = arena_[group[g]];
      const auto& edges = roadmap_.neighbors[p.head];
      const auto& row = profiles_[p.head];
      auto& out = children[g];
      out.reserve(edges.size());
      for (std::size_t k = 0; k < edges.size(); ++k) {
        const double h = fold_heuristic(p.h, row[k]);
        if (h > params_.beta) continue;
        out.push_back({edges[k].to, p.cost + edges[k].cost, h});
      }
    });

    std::vector<std::size_t> touched;
    for (std::size_t g = 0; g < group.size(); ++g) {
      for (const Child& c : children[g]) {
        add_plan(c.head, group[g], c.cost, c.h);
        touched.push_back(c.head);
      }
    }
    std::sort(touched.begin(), touched.end());
    touched.erase(std::unique(touched.begin(), touched.end()), touched.end());
    for (std::size_t x : touched) prune(x);
  }

  void prune(std::size_t head) {
    auto& ids = stored_[head];
    std::vector<Label> labels;
    labels.reserve(ids.size());
    for (std::size_t id : ids) labels.push_back({arena_[id].cost, arena_[id].h, arena_[id].open});
    const auto doomed = find_dominated(labels);
    if (doomed.empty()) return;
    std::vector<std::size_t> kept;
    kept.reserve(ids.size() - doomed.size());
    std::size_t d = 0;
    for (std::size_t k = 0; k < ids.size(); ++k) {
      if (d < doomed.size() && doomed[d] == k) {
        close(ids[k]);  // bucket entry goes stale and is skipped later
        ++d;
        continue;
      }
      kept.push_back(ids[k]);
    }
    ids = std::move(kept);
  }

  // Moves every open plan in buckets up to the current threshold into group.
  void take_from_buckets(std::vector<std::size_t>& group, double threshold,
                         std::size_t last_bucket) {
    const std::size_t end = std::min(last_bucket + 1, buckets_.size());
    std::size_t new_first = buckets_.size();
    for (std::size_t b = first_bucket_; b < end; ++b) {
      auto& bucket = buckets_[b];
      std::vector<std::size_t> remaining;
      for (std::size_t id : bucket) {
        if (!arena_[id].open) continue;
        if (arena_[id].cost <= threshold) {
          group.push_back(id);
        } else {
          remaining.push_back(id);
        }
      }
      bucket = std::move(remaining);
      if (!bucket.empty()) new_first = std::min(new_first, b);
    }
    if (new_first == buckets_.size()) {
      new_first = end;
      while (new_first < buckets_.size() && buckets_[new_first].empty()) ++new_first;
    }
    first_bucket_ = new_first;
  }

  std::vector<std::size_t> next_group(std::size_t& wave) {
    std::vector<std::size_t> group;
    while (open_count_ > 0) {
      const double threshold = static_cast<double>(wave) * width_;
      take_from_buckets(group, threshold, wave);
      if (!group.empty()) break;
      // an empty group expands nothing; the next wave raises the threshold
      ++wave;
    }
    std::sort(group.begin(), group.end());
    return group;
  }

  std::vector<std::size_t> node_sequence(std::size_t id) const {
    std::vector<std::size_t> seq;
    for (std::size_t cur = id; cur != kNoParent; cur = arena_[cur].parent) {
      seq.push_back(arena_[cur].head);
    }
    std::reverse(seq.begin(), seq.end());
    return seq;
  }

  std::optional<std::size_t> best_goal_plan() const {
    std::optional<std::size_t> best;
    for (std::size_t x = 0; x < roadmap_.size(); ++x) {
      if (!roadmap_.goal[x]) continue;
      for (std::size_t id : stored_[x]) {
        const PlanNode& p = arena_[id];
        if (p.h > params_.beta) continue;
        if (!best) {
          best = id;
          continue;
        }
        const PlanNode& b = arena_[*best];
        if (p.cost != b.cost) {
          if (p.cost < b.cost) best = id;
        } else if (p.h != b.h) {
          if (p.h < b.h) best = id;
        } else if (node_sequence(id) < node_sequence(*best)) {
          best = id;
        }
      }
    }
    return best;
  }

  Plan to_plan(std::size_t id) const {
    Plan plan;
    plan.head = arena_[id].head;
    plan.cost = arena_[id].cost;
    plan.h = arena_[id].h;
    plan.path = node_sequence(id);
    plan.path.pop_back();
    return plan;
  }

  std::vector<std::vector<FrontPoint>> fronts() const {
    std::vector<std::vector<FrontPoint>> out(roadmap_.size());
    for (std::size_t x = 0; x < roadmap_.size(); ++x) {
      std::vector<Label> labels;
      for (std::size_t id : stored_[x]) labels.push_back({arena_[id].cost, arena_[id].h, true});
      const auto doomed = find_dominated(labels);
      std::size_t d = 0;
      for (std::size_t k = 0; k < labels.size(); ++k) {
        if (d < doomed.size() && doomed[d] == k) {
          ++d;
          continue;
        }
        out[x].push_back({labels[k].cost, labels[k].h});
      }
      std::sort(out[x].begin(), out[x].end(), [](const FrontPoint& a, const FrontPoint& b) {
        return a.cost != b.cost ? a.cost < b.cost : a.h < b.h;
      });
      out[x].erase(std::unique(out[x].begin(), out[x].end()), out[x].end());
    }
    return out;
  }

  const Roadmap& roadmap_;
  const ProfileTable& profiles_;
  const ExploreParams& params_;
  unsigned workers_;
  double width_;

  std::vector<PlanNode> arena_;
  std::vector<std::vector<std::size_t>> stored_;  // P(x): surviving plan ids
  std::vector<std::vector<std::size_t>> buckets_;
  std::size_t first_bucket_ = 0;
  std::size_t open_count_ = 0;
};

}  // namespace

ExploreResult explore(const Roadmap& roadmap, const ProfileTable& profiles,
                      const ExploreParams& params, unsigned workers) {
  return Search(roadmap, profiles, params, workers).run();
}

}  // namespace pplan
