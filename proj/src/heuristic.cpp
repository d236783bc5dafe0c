#include "pplan/heuristic.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "pplan/parallel.hpp"

namespace pplan {

std::size_t edge_steps(double length, const HeuristicParams& hp) {
  const double step = hp.nominal_speed * hp.dt;
  // the small slack absorbs rounding in length / step for exact multiples
  const double raw = std::ceil(length / step - 1e-9);
  return std::max<std::size_t>(1, static_cast<std::size_t>(std::max(raw, 0.0)));
}

PlannerState interpolate_state(const PlannerState& u, const PlannerState& v, double s) {
  const double length = (v.position - u.position).norm();
  const double frac = length > 0.0 ? std::clamp(s / length, 0.0, 1.0) : 0.0;
  PlannerState out;
  out.position = u.position + frac * (v.position - u.position);
  out.yaw = wrap_angle(u.yaw + frac * wrap_angle(v.yaw - u.yaw));
  return out;
}

EdgeProfile edge_profile(const PlannerState& u, const PlannerState& v, const Environment& env,
                         const VisibilityParams& vp, const HeuristicParams& hp,
                         const HeuristicMap* map) {
  const double length = (v.position - u.position).norm();
  const std::size_t steps = edge_steps(length, hp);
  const Vec3 velocity =
      length > 0.0 ? Vec3((v.position - u.position) * (hp.nominal_speed / length)) : Vec3::Zero();
  const auto n_f = static_cast<double>(hp.n_f);

  EdgeProfile profile;
  profile.increments.reserve(steps);
  for (std::size_t t = 0; t < steps; ++t) {
    const PlannerState s =
        interpolate_state(u, v, static_cast<double>(t) * hp.nominal_speed * hp.dt);
    if (map != nullptr) {
      profile.increments.push_back(map_rate(s, velocity, *map) * hp.dt);
    } else {
      const auto k = static_cast<double>(count_visible_features(s, env, vp));
      // k / n_f is exact for k == n_f, so a fully covered step adds exactly 0
      profile.increments.push_back(hp.dt * (1.0 - k / n_f));
    }
  }
  return profile;
}

double fold_heuristic(double h0, std::span<const double> increments) {
  double h = h0;
  for (double inc : increments) h = std::max(0.0, h + inc);
  return h;
}

double map_rate(const PlannerState& s, const Vec3& velocity, const HeuristicMap& hm) {
  const auto& records = hm.records;
  if (records.empty()) return 0.0;
  std::vector<std::pair<double, std::size_t>> dist(records.size());
  for (std::size_t i = 0; i < records.size(); ++i) {
    const auto& r = records[i];
    const double dyaw = wrap_angle(s.yaw - r.yaw);
    dist[i] = {(s.position - r.position).squaredNorm() + (velocity - r.velocity).squaredNorm() +
                   hm.w_yaw * dyaw * dyaw,
               i};
  }
  const std::size_t k = std::min(std::max<std::size_t>(hm.k_nn, 1), dist.size());
  std::partial_sort(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(k), dist.end());

  if (dist.front().first == 0.0) return records[dist.front().second].rate;

  double weight_sum = 0.0;
  double acc = 0.0;
  for (std::size_t j = 0; j < k; ++j) {
    const double w = 1.0 / std::sqrt(dist[j].first);
    weight_sum += w;
    acc += w * records[dist[j].second].rate;
  }
  return acc / weight_sum;
}

ProfileTable profiles_for_roadmap(const Roadmap& roadmap, const Environment& env,
                                  const VisibilityParams& vp, const HeuristicParams& hp,
                                  const HeuristicMap* map, unsigned workers) {
  ProfileTable table(roadmap.size());
  parallel_for(roadmap.size(), workers, [&](std::size_t v) {
    const auto& list = roadmap.neighbors[v];
    auto& row = table[v];
    row.reserve(list.size());
    for (const Edge& e : list) {
      row.push_back(edge_profile(roadmap.nodes[v], roadmap.nodes[e.to], env, vp, hp, map));
    }
  });
  return table;
}

}  // namespace pplan
