#pragma once

#include <Eigen/Core>
#include <cstddef>
#include <cstdint>
#include <random>
#include <vector>

#include "pplan/environment.hpp"
#include "pplan/explore.hpp"
#include "pplan/heuristic.hpp"
#include "pplan/roadmap.hpp"

namespace pplan {

/// Unit-mass double integrator per axis, integrated with semi-implicit Euler.
struct VehicleModel {
  double dt_sim = 0.02;
  Vec3 u_max = Vec3::Constant(10.0);  // per-axis acceleration limit, m/s^2
};

struct NoiseModel {
  double sigma_imu = 0.0;  // accelerometer white noise per axis, m/s^2
  double sigma_vis = 0.0;  // relative feature position noise per axis, m
};

/// Per-axis LQR tracker for A = [[0, 1], [0, 0]], B = [0, 1]^T, shared by
/// x, y and z.
struct TrackerGains {
  Eigen::RowVector2d K = Eigen::RowVector2d::Zero();
  Eigen::Matrix2d Q = Eigen::Matrix2d::Identity();
  double R = 1.0;
  Eigen::Matrix2d P = Eigen::Matrix2d::Zero();  // stabilizing CARE solution
};

/// Solves the continuous algebraic Riccati equation with Newton-Kleinman
/// iteration. Throws NonConvergence if (A, Q) is not detectable or the
/// iteration does not reach 1e-10.
TrackerGains lqr_gain(const Eigen::Matrix2d& Q, double R);

/// Time-sampled reference. velocity[k] is the backward difference
/// (position[k] - position[k-1]) / dt, so an exactly tracked semi-implicit
/// integrator reproduces the positions.
struct NominalTrajectory {
  double dt = 0.02;
  std::vector<Vec3> position;
  std::vector<Vec3> velocity;
  std::vector<double> yaw;

  std::size_t size() const { return position.size(); }
  double length() const;
};

/// Constant-speed arc-length sampling of the plan's polyline with linear
/// shortest-direction yaw along each edge.
NominalTrajectory nominal_trajectory(const Plan& plan, const Roadmap& roadmap,
                                     double nominal_speed, double dt_sim);

/// Linear Kalman filter on (position, velocity) driven by accelerometer
/// readings and corrected by position fixes. Axes are decoupled with
/// isotropic noise, so one 2x2 (position, velocity) covariance is shared by
/// x, y and z.
class LocalizationFilter {
 public:
  using Covariance = Eigen::Matrix<double, 6, 6>;

  LocalizationFilter(double dt, double sigma_imu, const Vec3& position, const Vec3& velocity);

  void predict(const Vec3& measured_accel);
  /// Fix with isotropic covariance variance * I. Skipped when the
  /// innovation variance vanishes (nothing to weigh).
  void update_position(const Vec3& fix, double variance);

  const Vec3& position() const { return position_; }
  const Vec3& velocity() const { return velocity_; }
  const Eigen::Matrix2d& axis_covariance() const { return cov_; }
  /// Full covariance over (px, py, pz, vx, vy, vz).
  Covariance covariance() const;

 private:
  double dt_;
  Eigen::Matrix2d F_;
  Eigen::Matrix2d process_;
  Vec3 position_;
  Vec3 velocity_;
  Eigen::Matrix2d cov_;
};

struct TrialResult {
  double max_loc_error = 0.0;  // max_t |x_hat - x| (position)
  double max_deviation = 0.0;  // max_t |x_nom - x|
};

/// Optional per-step record of a trial (index 0 is the initial state).
struct TrialTrace {
  std::vector<Vec3> loc_error;  // x_hat - x
  std::vector<Vec3> deviation;  // x - x_nom
  std::vector<std::size_t> visible;
  std::vector<Eigen::Matrix2d> covariance;  // per-axis (position, velocity)
};

/// Seeds the generator for trial stream `stream`.
std::mt19937_64 make_stream(std::uint64_t stream);

/// One closed-loop run: LQR on the estimate, noisy IMU prediction, and a
/// translation-only landmark fix from the features visible at the true pose.
TrialResult simulate_trial(const NominalTrajectory& traj, const Environment& env,
                           const VisibilityParams& vp, const NoiseModel& noise,
                           const TrackerGains& gains, const VehicleModel& vehicle,
                           std::mt19937_64& rng, TrialTrace* trace = nullptr);

struct VerifyParams {
  std::size_t trials = 1000;
  double delta_xhat = 0.5;
  double alpha = 0.05;
  std::uint64_t rng_seed = 1;
};

struct VerifyResult {
  double p_hat = 0.0;
  double std_error = 0.0;  // binomial standard error of p_hat
  bool pass = false;
  std::vector<TrialResult> results;
};

/// Runs independent trials (stream i seeded with rng_seed ^ i) and reports
/// the fraction whose max localization error reaches delta_xhat.
VerifyResult mc_verify(const NominalTrajectory& traj, const Environment& env,
                       const VisibilityParams& vp, const NoiseModel& noise,
                       const TrackerGains& gains, const VehicleModel& vehicle,
                       const VerifyParams& params, unsigned workers = 1);

/// Everything needed to search and certify at an arbitrary beta.
struct RefineProblem {
  const Roadmap* roadmap = nullptr;
  const ProfileTable* profiles = nullptr;
  const Environment* env = nullptr;
  double epsilon = 0.5;
  double nominal_speed = 1.0;
  VisibilityParams vp;
  NoiseModel noise;
  TrackerGains gains;
  VehicleModel vehicle;
  VerifyParams verify;
  unsigned workers = 1;
};

struct RefineStep {
  double beta = 0.0;
  bool found = false;  // explore produced a plan
  double cost = 0.0;
  double p_hat = 1.0;
  bool pass = false;
};

struct RefineResult {
  Plan plan;
  double beta_final = 0.0;
  VerifyResult verification;
  std::vector<RefineStep> history;  // one entry per explore + verify round
};

/// Bisection on beta over [0, beta_max] keeping the largest certified bound.
/// Throws NoFeasiblePlan when beta = 0 has no plan or fails verification.
RefineResult refine_bound(const RefineProblem& problem, double beta_max, std::size_t max_iters);

struct ErrorStats {
  double mean = 0.0;
  double variance = 0.0;  // unbiased
  double p99 = 0.0;       // nearest-rank 99th percentile
};

ErrorStats summarize(std::vector<double> values);

}  // namespace pplan
