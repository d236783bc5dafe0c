#include "pplan/montecarlo.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>

#include "pplan/errors.hpp"
#include "pplan/parallel.hpp"

namespace pplan {

// ---------------------------------------------------------------------------
// LQR

namespace {

// Solves Ac^T P + P Ac + M = 0 for symmetric P through the Kronecker form.
Eigen::Matrix2d solve_lyapunov(const Eigen::Matrix2d& Ac, const Eigen::Matrix2d& M) {
  const Eigen::Matrix2d I = Eigen::Matrix2d::Identity();
  Eigen::Matrix4d L;
  // vec(Ac^T P) = (I kron Ac^T) vec(P), vec(P Ac) = (Ac^T kron I) vec(P)
  for (int r = 0; r < 2; ++r)
    for (int c = 0; c < 2; ++c)
      L.block<2, 2>(2 * r, 2 * c) = I(r, c) * Ac.transpose() + Ac(c, r) * I;
  Eigen::Vector4d rhs;
  rhs << -M(0, 0), -M(1, 0), -M(0, 1), -M(1, 1);
  const Eigen::Vector4d v = L.fullPivLu().solve(rhs);
  Eigen::Matrix2d P;
  P << v(0), v(2), v(1), v(3);
  return 0.5 * (P + P.transpose());
}

}  // namespace

TrackerGains lqr_gain(const Eigen::Matrix2d& Q, double R) {
  if (!(R > 0.0)) throw ValidationError("lqr_gain: R must be positive");
  if ((Q - Q.transpose()).cwiseAbs().maxCoeff() > 1e-12) {
    throw ValidationError("lqr_gain: Q must be symmetric");
  }
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> eig(Q);
  if (eig.eigenvalues().minCoeff() < -1e-12) {
    throw ValidationError("lqr_gain: Q must be positive semidefinite");
  }
  // For the double integrator, (A, Q) is detectable iff position is weighted.
  if (!(Q(0, 0) > 0.0)) throw NonConvergence("lqr_gain: (A, Q) is not detectable");

  Eigen::Matrix2d A;
  A << 0, 1, 0, 0;
  const Eigen::Vector2d B(0, 1);

  Eigen::RowVector2d K(1.0, 1.0);  // any positive gains stabilize
  Eigen::Matrix2d P = Eigen::Matrix2d::Zero();
  for (int iter = 0; iter < 200; ++iter) {
    const Eigen::Matrix2d Ac = A - B * K;
    const Eigen::Matrix2d next = solve_lyapunov(Ac, Q + K.transpose() * R * K);
    const double change = (next - P).cwiseAbs().maxCoeff();
    P = next;
    K = (B.transpose() * P) / R;
    if (change < 1e-10 * std::max(1.0, P.cwiseAbs().maxCoeff())) {
      const Eigen::Matrix2d residual =
          A.transpose() * P + P * A - P * B * B.transpose() * P / R + Q;
      if (residual.cwiseAbs().maxCoeff() > 1e-8 * std::max(1.0, Q.cwiseAbs().maxCoeff())) break;
      TrackerGains g;
      g.K = K;
      g.Q = Q;
      g.R = R;
      g.P = P;
      return g;
    }
  }
  throw NonConvergence("lqr_gain: Riccati iteration did not reach tolerance");
}

// ---------------------------------------------------------------------------
// Nominal trajectory

double NominalTrajectory::length() const {
  double total = 0.0;
  for (std::size_t k = 1; k < position.size(); ++k) total += (position[k] - position[k - 1]).norm();
  return total;
}

NominalTrajectory nominal_trajectory(const Plan& plan, const Roadmap& roadmap,
                                     double nominal_speed, double dt_sim) {
  const auto ids = plan.nodes();
  std::vector<double> cumulative{0.0};
  for (std::size_t j = 1; j < ids.size(); ++j) {
    cumulative.push_back(cumulative.back() +
                         edge_cost(roadmap.nodes[ids[j - 1]], roadmap.nodes[ids[j]]));
  }
  const double total = cumulative.back();
  const double step = nominal_speed * dt_sim;
  const std::size_t steps =
      total > 0.0 ? static_cast<std::size_t>(std::ceil(total / step - 1e-9)) : 0;

  NominalTrajectory traj;
  traj.dt = dt_sim;
  std::size_t seg = 0;
  for (std::size_t k = 0; k <= steps; ++k) {
    const double s = std::min(static_cast<double>(k) * step, total);
    while (seg + 2 < ids.size() && cumulative[seg + 1] < s) ++seg;
    if (ids.size() == 1) {
      traj.position.push_back(roadmap.nodes[ids[0]].position);
      traj.yaw.push_back(roadmap.nodes[ids[0]].yaw);
      continue;
    }
    const PlannerState st =
        interpolate_state(roadmap.nodes[ids[seg]], roadmap.nodes[ids[seg + 1]], s - cumulative[seg]);
    traj.position.push_back(st.position);
    traj.yaw.push_back(st.yaw);
  }

  traj.velocity.assign(traj.position.size(), Vec3::Zero());
  for (std::size_t k = 1; k < traj.position.size(); ++k) {
    traj.velocity[k] = (traj.position[k] - traj.position[k - 1]) / dt_sim;
  }
  if (traj.position.size() > 1) traj.velocity[0] = traj.velocity[1];
  return traj;
}

// ---------------------------------------------------------------------------
// Filter

LocalizationFilter::LocalizationFilter(double dt, double sigma_imu, const Vec3& position,
                                       const Vec3& velocity)
    : dt_(dt), position_(position), velocity_(velocity) {
  // semi-implicit Euler: v' = v + a dt, p' = p + v' dt
  F_ << 1.0, dt, 0.0, 1.0;
  const Eigen::Vector2d G(dt * dt, dt);
  process_ = sigma_imu * sigma_imu * G * G.transpose();
  cov_.setZero();
}

void LocalizationFilter::predict(const Vec3& measured_accel) {
  velocity_ += measured_accel * dt_;
  position_ += velocity_ * dt_;
  cov_ = F_ * cov_ * F_.transpose() + process_;
}

void LocalizationFilter::update_position(const Vec3& fix, double variance) {
  const double S = cov_(0, 0) + variance;
  if (!(S > 0.0)) return;
  // K = P H^T / S with H = [1 0]
  const Eigen::Vector2d gain = cov_.col(0) / S;
  const Vec3 innovation = fix - position_;
  position_ += gain(0) * innovation;
  velocity_ += gain(1) * innovation;
  // Joseph form keeps the covariance symmetric positive semidefinite
  Eigen::Matrix2d I_KH = Eigen::Matrix2d::Identity();
  I_KH.col(0) -= gain;
  cov_ = I_KH * cov_ * I_KH.transpose() + variance * gain * gain.transpose();
  cov_ = 0.5 * (cov_ + cov_.transpose());
}

LocalizationFilter::Covariance LocalizationFilter::covariance() const {
  Covariance full = Covariance::Zero();
  for (int i = 0; i < 3; ++i) {
    full(i, i) = cov_(0, 0);
    full(i, i + 3) = cov_(0, 1);
    full(i + 3, i) = cov_(1, 0);
    full(i + 3, i + 3) = cov_(1, 1);
  }
  return full;
}

// ---------------------------------------------------------------------------
// Trials

std::mt19937_64 make_stream(std::uint64_t stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(stream & 0xffffffffu),
                    static_cast<std::uint32_t>(stream >> 32)};
  return std::mt19937_64(seq);
}

namespace {

Vec3 gaussian3(std::normal_distribution<double>& normal, std::mt19937_64& rng) {
  const double x = normal(rng);
  const double y = normal(rng);
  const double z = normal(rng);
  return {x, y, z};
}

}  // namespace

TrialResult simulate_trial(const NominalTrajectory& traj, const Environment& env,
                           const VisibilityParams& vp, const NoiseModel& noise,
                           const TrackerGains& gains, const VehicleModel& vehicle,
                           std::mt19937_64& rng, TrialTrace* trace) {
  TrialResult result;
  if (traj.size() == 0) return result;

  std::normal_distribution<double> normal(0.0, 1.0);
  const double dt = traj.dt;
  const double fix_var = noise.sigma_vis * noise.sigma_vis;

  Vec3 p = traj.position[0];
  Vec3 v = traj.velocity[0];
  LocalizationFilter filter(dt, noise.sigma_imu, p, v);

  auto record = [&](std::size_t k, std::size_t visible) {
    const Vec3 loc = filter.position() - p;
    const Vec3 dev = p - traj.position[k];
    result.max_loc_error = std::max(result.max_loc_error, loc.norm());
    result.max_deviation = std::max(result.max_deviation, dev.norm());
    if (trace != nullptr) {
      trace->loc_error.push_back(loc);
      trace->deviation.push_back(dev);
      trace->visible.push_back(visible);
      trace->covariance.push_back(filter.axis_covariance());
    }
  };
  record(0, 0);

  std::vector<std::size_t> visible;
  for (std::size_t k = 0; k + 1 < traj.size(); ++k) {
    const Vec3 feedforward = (traj.velocity[k + 1] - traj.velocity[k]) / dt;
    const Vec3 pos_err = traj.position[k] - filter.position();
    const Vec3 vel_err = traj.velocity[k] - filter.velocity();
    Vec3 u = feedforward + gains.K(0) * pos_err + gains.K(1) * vel_err;
    u = u.cwiseMax(-vehicle.u_max).cwiseMin(vehicle.u_max);

    const Vec3 imu = u + noise.sigma_imu * gaussian3(normal, rng);
    v += u * dt;
    p += v * dt;
    filter.predict(imu);

    visible_features({p, traj.yaw[k + 1]}, env, vp, visible);
    if (!visible.empty()) {
      // Each landmark i yields z_i = (f_i - p) + n_i and the translation-only
      // fix is mean_i(f_i - z_i) = p - mean_i(n_i). The mean of k iid
      // N(0, s^2 I) draws is N(0, s^2 / k I), so it is sampled directly.
      const double k_vis = static_cast<double>(visible.size());
      const Vec3 fix = p - (noise.sigma_vis / std::sqrt(k_vis)) * gaussian3(normal, rng);
      filter.update_position(fix, fix_var / k_vis);
    }
    record(k + 1, visible.size());
  }
  return result;
}

VerifyResult mc_verify(const NominalTrajectory& traj, const Environment& env,
                       const VisibilityParams& vp, const NoiseModel& noise,
                       const TrackerGains& gains, const VehicleModel& vehicle,
                       const VerifyParams& params, unsigned workers) {
  VerifyResult out;
  out.results.resize(params.trials);
  parallel_for(params.trials, workers, [&](std::size_t i) {
    auto rng = make_stream(params.rng_seed ^ static_cast<std::uint64_t>(i));
    out.results[i] = simulate_trial(traj, env, vp, noise, gains, vehicle, rng);
  });
  const auto exceed = std::count_if(out.results.begin(), out.results.end(), [&](const auto& r) {
    return r.max_loc_error >= params.delta_xhat;
  });
  const double n = static_cast<double>(std::max<std::size_t>(params.trials, 1));
  out.p_hat = static_cast<double>(exceed) / n;
  out.std_error = std::sqrt(out.p_hat * (1.0 - out.p_hat) / n);
  out.pass = out.p_hat <= params.alpha;
  return out;
}

// ---------------------------------------------------------------------------
// Bound refinement

namespace {

struct Evaluation {
  RefineStep step;
  Plan plan;
  VerifyResult verification;
};

Evaluation evaluate(const RefineProblem& pr, double beta) {
  Evaluation e;
  e.step.beta = beta;
  ExploreParams ep;
  ep.epsilon = pr.epsilon;
  ep.beta = beta;
  try {
    e.plan = explore(*pr.roadmap, *pr.profiles, ep, pr.workers).plan;
  } catch (const NoFeasiblePlan&) {
    return e;
  }
  e.step.found = true;
  e.step.cost = e.plan.cost;
  const auto traj = nominal_trajectory(e.plan, *pr.roadmap, pr.nominal_speed, pr.vehicle.dt_sim);
  e.verification =
      mc_verify(traj, *pr.env, pr.vp, pr.noise, pr.gains, pr.vehicle, pr.verify, pr.workers);
  e.step.p_hat = e.verification.p_hat;
  e.step.pass = e.verification.pass;
  return e;
}

}  // namespace

RefineResult refine_bound(const RefineProblem& problem, double beta_max, std::size_t max_iters) {
  RefineResult out;
  auto accept = [&](Evaluation&& e) {
    out.plan = std::move(e.plan);
    out.beta_final = e.step.beta;
    out.verification = std::move(e.verification);
  };

  Evaluation top = evaluate(problem, beta_max);
  out.history.push_back(top.step);
  if (top.step.pass) {
    accept(std::move(top));
    return out;
  }

  Evaluation bottom = evaluate(problem, 0.0);
  out.history.push_back(bottom.step);
  if (!bottom.step.pass) {
    throw NoFeasiblePlan(bottom.step.found ? "refine_bound: plan at beta = 0 fails verification"
                                           : "refine_bound: no plan at beta = 0");
  }
  accept(std::move(bottom));

  double lo = 0.0;
  double hi = beta_max;
  for (std::size_t iter = 0; iter < max_iters; ++iter) {
    const double mid = 0.5 * (lo + hi);
    Evaluation e = evaluate(problem, mid);
    out.history.push_back(e.step);
    if (e.step.pass) {
      lo = mid;
      accept(std::move(e));
    } else {
      hi = mid;
    }
  }
  return out;
}

ErrorStats summarize(std::vector<double> values) {
  ErrorStats s;
  if (values.empty()) return s;
  const double n = static_cast<double>(values.size());
  for (double v : values) s.mean += v;
  s.mean /= n;
  if (values.size() > 1) {
    for (double v : values) s.variance += (v - s.mean) * (v - s.mean);
    s.variance /= n - 1.0;
  }
  std::sort(values.begin(), values.end());
  const auto rank = static_cast<std::size_t>(std::ceil(0.99 * n));
  s.p99 = values[std::clamp<std::size_t>(rank, 1, values.size()) - 1];
  return s;
}

}  // namespace pplan
