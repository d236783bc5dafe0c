#include "pplan/environment.hpp"

#include <algorithm>
#include <cmath>

namespace pplan {

double wrap_angle(double a) {
  constexpr double kTwoPi = 2.0 * std::numbers::pi;
  double w = std::fmod(a + std::numbers::pi, kTwoPi);
  if (w < 0.0) w += kTwoPi;
  w -= std::numbers::pi;
  // fmod rounding can land exactly on +pi
  if (w >= std::numbers::pi) w -= kTwoPi;
  return w;
}

bool point_free(const Vec3& p, const Environment& env) {
  if (!env.workspace.contains(p)) return false;
  return std::none_of(env.obstacles.begin(), env.obstacles.end(),
                      [&](const Obstacle& o) { return o.contains(p); });
}

bool segment_hits_box(const Vec3& a, const Vec3& b, const Box& box) {
  const Vec3 d = b - a;
  double t_enter = 0.0;
  double t_exit = 1.0;
  for (int axis = 0; axis < 3; ++axis) {
    if (d[axis] == 0.0) {
      if (a[axis] < box.lo[axis] || a[axis] > box.hi[axis]) return false;
      continue;
    }
    const double inv = 1.0 / d[axis];
    double t0 = (box.lo[axis] - a[axis]) * inv;
    double t1 = (box.hi[axis] - a[axis]) * inv;
    if (t0 > t1) std::swap(t0, t1);
    t_enter = std::max(t_enter, t0);
    t_exit = std::min(t_exit, t1);
    if (t_enter > t_exit) return false;
  }
  return true;
}

bool segment_collides(const Vec3& a, const Vec3& b, const Environment& env) {
  return std::any_of(env.obstacles.begin(), env.obstacles.end(),
                     [&](const Obstacle& o) { return segment_hits_box(a, b, o); });
}

namespace {

template <typename OnVisible>
void for_each_visible(const PlannerState& s, const Environment& env, const VisibilityParams& vp,
                      OnVisible&& on_visible) {
  const double hx = std::cos(s.yaw);
  const double hy = std::sin(s.yaw);
  const double cos_fov = std::cos(vp.fov_half_angle);
  const double range_sq = vp.max_range * vp.max_range;
  const double px = s.position.x();
  const double py = s.position.y();
  const double pz = s.position.z();
  const std::size_t count = env.features.size();
  for (std::size_t i = 0; i < count; ++i) {
    const Vec3& f = env.features[i];
    const double dx = f.x() - px;
    const double dy = f.y() - py;
    const double dz = f.z() - pz;
    const double dist_sq = dx * dx + dy * dy + dz * dz;
    if (dist_sq > range_sq) continue;
    // angle <= fov  <=>  heading . d >= cos(fov) |d|  (heading has unit norm)
    const double along = hx * dx + hy * dy;
    if (dist_sq > 0.0) {
      if (cos_fov >= 0.0) {
        if (along < 0.0 || along * along < cos_fov * cos_fov * dist_sq) continue;
      } else if (along < cos_fov * std::sqrt(dist_sq)) {
        continue;
      }
    }
    if (segment_collides(s.position, f, env)) continue;
    on_visible(i);
  }
}

}  // namespace

std::vector<std::size_t> visible_features(const PlannerState& s, const Environment& env,
                                          const VisibilityParams& vp) {
  std::vector<std::size_t> out;
  visible_features(s, env, vp, out);
  return out;
}

void visible_features(const PlannerState& s, const Environment& env, const VisibilityParams& vp,
                      std::vector<std::size_t>& out) {
  out.clear();
  for_each_visible(s, env, vp, [&](std::size_t i) { out.push_back(i); });
}

std::size_t count_visible_features(const PlannerState& s, const Environment& env,
                                   const VisibilityParams& vp) {
  std::size_t n = 0;
  for_each_visible(s, env, vp, [&](std::size_t) { ++n; });
  return n;
}

}  // namespace pplan
