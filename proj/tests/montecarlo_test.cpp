#include <gtest/gtest.h>

#include <Eigen/Eigenvalues>
#include <numbers>
#include <random>

#include "oracles.hpp"
#include "pplan/errors.hpp"
#include "pplan/montecarlo.hpp"

namespace pplan {
namespace {

TEST(LqrGain, IdentityWeightsMatchClosedForm) {
  const auto g = lqr_gain(Eigen::Matrix2d::Identity(), 1.0);
  EXPECT_NEAR(g.K(0), 1.0, 1e-10);
  EXPECT_NEAR(g.K(1), std::sqrt(3.0), 1e-10);
}

TEST(LqrGain, ScaledWeights) {
  const auto g = lqr_gain(4.0 * Eigen::Matrix2d::Identity(), 1.0);
  EXPECT_NEAR(g.K(0), 2.0, 1e-10);
  EXPECT_NEAR(g.K(1), std::sqrt(8.0), 1e-10);
}

TEST(LqrGain, RandomDiagonalWeightsSolveRiccati) {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> U(0.05, 20.0);
  Eigen::Matrix2d A;
  A << 0, 1, 0, 0;
  const Eigen::Vector2d B(0, 1);
  for (int i = 0; i < 50; ++i) {
    const double q1 = U(rng), q2 = U(rng), r = U(rng);
    Eigen::Matrix2d Q = Eigen::Matrix2d::Zero();
    Q(0, 0) = q1;
    Q(1, 1) = q2;
    const auto g = lqr_gain(Q, r);
    const auto [k1, k2] = oracle::double_integrator_gain(q1, q2, r);
    EXPECT_NEAR(g.K(0), k1, 1e-8 * std::max(1.0, k1));
    EXPECT_NEAR(g.K(1), k2, 1e-8 * std::max(1.0, k2));
    const Eigen::Matrix2d res = A.transpose() * g.P + g.P * A - g.P * B * B.transpose() * g.P / r + Q;
    EXPECT_LT(res.cwiseAbs().maxCoeff(), 1e-8 * std::max(1.0, std::max(q1, q2)));
    const Eigen::Matrix2d Ac = A - B * g.K;
    const auto ev = Ac.eigenvalues();
    EXPECT_LT(ev(0).real(), 0.0);
    EXPECT_LT(ev(1).real(), 0.0);
  }
}

TEST(LqrGain, OffDiagonalWeightsSolveRiccati) {
  Eigen::Matrix2d Q;
  Q << 2.0, 0.5, 0.5, 1.0;
  const auto g = lqr_gain(Q, 0.5);
  Eigen::Matrix2d A;
  A << 0, 1, 0, 0;
  const Eigen::Vector2d B(0, 1);
  const Eigen::Matrix2d res = A.transpose() * g.P + g.P * A - g.P * B * B.transpose() * g.P / 0.5 + Q;
  EXPECT_LT(res.cwiseAbs().maxCoeff(), 1e-8);
}

TEST(LqrGain, RejectsBadWeights) {
  Eigen::Matrix2d Q = Eigen::Matrix2d::Zero();
  Q(1, 1) = 1.0;
  EXPECT_THROW(lqr_gain(Q, 1.0), NonConvergence);
  EXPECT_THROW(lqr_gain(Eigen::Matrix2d::Zero(), 1.0), NonConvergence);
  EXPECT_THROW(lqr_gain(Eigen::Matrix2d::Identity(), 0.0), ValidationError);
  Eigen::Matrix2d asym;
  asym << 1, 1, 0, 1;
  EXPECT_THROW(lqr_gain(asym, 1.0), ValidationError);
  Eigen::Matrix2d indefinite;
  indefinite << 1, 2, 2, 1;
  EXPECT_THROW(lqr_gain(indefinite, 1.0), ValidationError);
}

Roadmap line_roadmap(std::vector<Vec3> points) {
  Roadmap g;
  for (const auto& p : points) g.nodes.push_back({p, 0.0});
  g.neighbors.assign(points.size(), {});
  g.goal.assign(points.size(), false);
  g.goal.back() = true;
  return g;
}

Plan chain(std::size_t n) {
  Plan p;
  for (std::size_t i = 0; i + 1 < n; ++i) p.path.push_back(i);
  p.head = n - 1;
  return p;
}

TEST(NominalTrajectory, OneMeterEdge) {
  const auto g = line_roadmap({Vec3::Zero(), Vec3(1, 0, 0)});
  const auto t = nominal_trajectory(chain(2), g, 1.0, 0.1);
  ASSERT_EQ(t.size(), 11u);
  for (std::size_t k = 0; k < t.size(); ++k) {
    EXPECT_NEAR(t.position[k].x(), 0.1 * static_cast<double>(k), 1e-12);
    EXPECT_NEAR(t.velocity[k].x(), 1.0, 1e-9);
  }
  EXPECT_NEAR(t.length(), 1.0, 1e-12);
}

TEST(NominalTrajectory, ZeroLengthPlan) {
  const auto g = line_roadmap({Vec3(1, 2, 3)});
  Plan p;
  const auto t = nominal_trajectory(p, g, 1.0, 0.1);
  ASSERT_EQ(t.size(), 1u);
  EXPECT_EQ(t.position[0], Vec3(1, 2, 3));
}

TEST(NominalTrajectory, BendAndFinalPartialStep) {
  const auto g = line_roadmap({Vec3::Zero(), Vec3(1, 0, 0), Vec3(1, 0.55, 0)});
  const auto t = nominal_trajectory(chain(3), g, 1.0, 0.1);
  ASSERT_EQ(t.size(), 17u);  // ceil(1.55 / 0.1) + 1
  EXPECT_EQ(t.position.back(), Vec3(1, 0.55, 0));
  EXPECT_NEAR(t.position[12].y(), 0.2, 1e-12);
  EXPECT_NEAR(t.position[12].x(), 1.0, 1e-12);
  for (std::size_t k = 1; k < t.size(); ++k) {
    EXPECT_LE((t.position[k] - t.position[k - 1]).norm(), 0.1 + 1e-12);
  }
}

Environment open_room() {
  Environment env;
  env.workspace = {Vec3(-10, -10, -10), Vec3(20, 10, 10)};
  return env;
}

NominalTrajectory straight(double length, double dt) {
  const auto g = line_roadmap({Vec3::Zero(), Vec3(length, 0, 0)});
  return nominal_trajectory(chain(2), g, 1.0, dt);
}

const VisibilityParams kVp{std::numbers::pi / 3, 50.0};

TEST(SimulateTrial, ZeroNoiseTracksExactly) {
  auto env = open_room();
  env.features = {Vec3(5, 1, 0), Vec3(5, -1, 0)};
  const auto traj = straight(3.0, 0.02);
  auto rng = make_stream(1);
  TrialTrace trace;
  const auto r = simulate_trial(traj, env, kVp, {}, lqr_gain(Eigen::Matrix2d::Identity(), 1.0), {},
                                rng, &trace);
  EXPECT_EQ(r.max_loc_error, 0.0);
  EXPECT_LE(r.max_deviation, 1e-6);
  EXPECT_EQ(trace.loc_error.size(), traj.size());
}

TEST(SimulateTrial, ExactFixWithoutVisualNoise) {
  auto env = open_room();
  env.features = {Vec3(8, 0, 0)};
  const auto traj = straight(2.0, 0.02);
  auto rng = make_stream(3);
  TrialTrace trace;
  simulate_trial(traj, env, kVp, {0.5, 0.0}, lqr_gain(Eigen::Matrix2d::Identity(), 1.0), {}, rng,
                 &trace);
  for (std::size_t k = 1; k < trace.loc_error.size(); ++k) {
    ASSERT_EQ(trace.visible[k], 1u);
    EXPECT_LT(trace.loc_error[k].norm(), 1e-12) << k;
  }
}

TEST(SimulateTrial, ImuOnlyVarianceMatchesDoubleIntegration) {
  const auto traj = straight(1.0, 0.02);  // 50 steps
  const std::size_t steps = traj.size() - 1;
  const NoiseModel noise{0.5, 0.0};
  const auto gains = lqr_gain(Eigen::Matrix2d::Identity(), 1.0);
  const double expect = oracle::imu_position_variance(0.5, 0.02, steps);

  double sum_sq = 0.0;
  std::size_t count = 0;
  for (std::uint64_t i = 0; i < 10000; ++i) {
    auto rng = make_stream(1000 + i);
    TrialTrace trace;
    simulate_trial(traj, open_room(), kVp, noise, gains, {}, rng, &trace);
    const Vec3 e = trace.loc_error.back();
    for (int a = 0; a < 3; ++a) sum_sq += e[a] * e[a];
    count += 3;
    if (i == 0) EXPECT_NEAR(trace.covariance.back()(0, 0), expect, 1e-12 * expect);
  }
  const double var = sum_sq / static_cast<double>(count);
  EXPECT_NEAR(var, expect, 0.1 * expect);
}

TEST(SimulateTrial, CovarianceStaysPsd) {
  auto env = open_room();
  for (int i = 0; i < 10; ++i) env.features.push_back(Vec3(6, -2 + 0.4 * i, 0.5));
  const auto traj = straight(4.0, 0.02);
  const auto gains = lqr_gain(Eigen::Matrix2d::Identity(), 1.0);
  for (std::uint64_t s = 0; s < 20; ++s) {
    auto rng = make_stream(s);
    TrialTrace trace;
    simulate_trial(traj, env, kVp, {0.3, 0.02}, gains, {}, rng, &trace);
    for (const auto& c : trace.covariance) {
      EXPECT_LT(std::abs(c(0, 1) - c(1, 0)), 1e-15);
      Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> eig(c);
      EXPECT_GE(eig.eigenvalues().minCoeff(), -1e-15);
    }
  }
  LocalizationFilter f(0.02, 0.3, Vec3::Zero(), Vec3::Zero());
  for (int i = 0; i < 100; ++i) f.predict(Vec3::Zero());
  f.update_position(Vec3(0.1, 0, 0), 1e-4);
  Eigen::SelfAdjointEigenSolver<LocalizationFilter::Covariance> eig(f.covariance());
  EXPECT_GE(eig.eigenvalues().minCoeff(), -1e-15);
}

TEST(SimulateTrial, SaturationLimitsAcceleration) {
  const auto traj = straight(1.0, 0.02);
  VehicleModel vm;
  vm.u_max = Vec3::Constant(1e-3);
  auto rng = make_stream(4);
  TrialTrace trace;
  simulate_trial(traj, open_room(), kVp, {2.0, 0.0}, lqr_gain(Eigen::Matrix2d::Identity(), 1.0), vm,
                 rng, &trace);
  // the true velocity can change by at most u_max * dt per step, so the
  // deviation from the constant-velocity nominal grows at most quadratically
  for (std::size_t k = 0; k < trace.deviation.size(); ++k) {
    const double t = 0.02 * static_cast<double>(k);
    EXPECT_LE(trace.deviation[k].norm(), std::sqrt(3.0) * 1e-3 * t * t + 1e-9);
  }
}

TEST(MakeStream, DistinctAndReproducible) {
  auto a = make_stream(5), b = make_stream(5), c = make_stream(6);
  const auto x = a();
  EXPECT_EQ(x, b());
  EXPECT_NE(x, c());
}

TEST(McVerify, ZeroNoisePasses) {
  auto env = open_room();
  env.features = {Vec3(5, 0, 0)};
  VerifyParams vp;
  vp.trials = 50;
  vp.alpha = 1e-9;
  const auto r = mc_verify(straight(2.0, 0.02), env, kVp, {}, lqr_gain(Eigen::Matrix2d::Identity(), 1.0),
                           {}, vp, 4);
  EXPECT_EQ(r.p_hat, 0.0);
  EXPECT_EQ(r.std_error, 0.0);
  EXPECT_TRUE(r.pass);
}

TEST(McVerify, ZeroThresholdAlwaysExceeds) {
  VerifyParams vp;
  vp.trials = 40;
  vp.delta_xhat = 0.0;
  vp.alpha = 0.99;
  const auto r = mc_verify(straight(1.0, 0.02), open_room(), kVp, {},
                           lqr_gain(Eigen::Matrix2d::Identity(), 1.0), {}, vp);
  EXPECT_EQ(r.p_hat, 1.0);
  EXPECT_FALSE(r.pass);
}

TEST(McVerify, WorkerCountDoesNotChangeResults) {
  auto env = open_room();
  for (int i = 0; i < 5; ++i) env.features.push_back(Vec3(4, -1 + 0.5 * i, 0));
  VerifyParams vp;
  vp.trials = 300;
  vp.delta_xhat = 0.05;
  vp.rng_seed = 99;
  const auto traj = straight(3.0, 0.02);
  const auto gains = lqr_gain(Eigen::Matrix2d::Identity(), 1.0);
  const auto a = mc_verify(traj, env, kVp, {0.4, 0.05}, gains, {}, vp, 1);
  const auto b = mc_verify(traj, env, kVp, {0.4, 0.05}, gains, {}, vp, 8);
  ASSERT_EQ(a.results.size(), b.results.size());
  for (std::size_t i = 0; i < a.results.size(); ++i) {
    EXPECT_EQ(a.results[i].max_loc_error, b.results[i].max_loc_error);
    EXPECT_EQ(a.results[i].max_deviation, b.results[i].max_deviation);
  }
  EXPECT_EQ(a.p_hat, b.p_hat);
  // trial i is a function of its own stream only
  auto rng = make_stream(vp.rng_seed ^ 17u);
  const auto single = simulate_trial(traj, env, kVp, {0.4, 0.05}, gains, {}, rng);
  EXPECT_EQ(single.max_loc_error, a.results[17].max_loc_error);
}

TEST(McVerify, MoreFeaturesDoNotRaiseMedianError) {
  auto sparse = open_room();
  sparse.features = {Vec3(2.5, 0.5, 0)};  // visible only near the start
  auto dense = sparse;
  for (int i = 0; i < 12; ++i) dense.features.push_back(Vec3(9, -1.5 + 0.25 * i, 0.2));
  VerifyParams vp;
  vp.trials = 1000;
  const auto traj = straight(5.0, 0.02);
  const auto gains = lqr_gain(Eigen::Matrix2d::Identity(), 1.0);
  const NoiseModel noise{0.3, 0.05};
  auto median = [](const VerifyResult& r) {
    std::vector<double> v;
    for (const auto& t : r.results) v.push_back(t.max_loc_error);
    std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(v.size() / 2), v.end());
    return v[v.size() / 2];
  };
  const double m_sparse = median(mc_verify(traj, sparse, kVp, noise, gains, {}, vp, 8));
  const double m_dense = median(mc_verify(traj, dense, kVp, noise, gains, {}, vp, 8));
  EXPECT_LE(m_dense, m_sparse);
}

TEST(Summarize, MeanVarianceAndNearestRankP99) {
  std::vector<double> v;
  for (int i = 100; i >= 1; --i) v.push_back(i);
  const auto s = summarize(v);
  EXPECT_DOUBLE_EQ(s.mean, 50.5);
  EXPECT_NEAR(s.variance, 841.6666666666666, 1e-9);
  EXPECT_EQ(s.p99, 99.0);
  EXPECT_EQ(summarize({7.0}).p99, 7.0);
  EXPECT_EQ(summarize({7.0}).variance, 0.0);
}

// Path 0-1-2 with the goal at 2; profiles are all positive so beta = 0
// finds nothing.
struct RefineFixture {
  Roadmap g;
  ProfileTable prof;
  Environment env = open_room();
  RefineProblem problem;

  explicit RefineFixture(double increment) {
    g = line_roadmap({Vec3::Zero(), Vec3(0.5, 0, 0), Vec3(1, 0, 0)});
    g.r_n = 1.0;
    g.neighbors = {{{1, 0.5}}, {{0, 0.5}, {2, 0.5}}, {{1, 0.5}}};
    prof = {{{{increment}}}, {{{increment}}, {{increment}}}, {{{increment}}}};
    problem.roadmap = &g;
    problem.profiles = &prof;
    problem.env = &env;
    problem.gains = lqr_gain(Eigen::Matrix2d::Identity(), 1.0);
    problem.vehicle.dt_sim = 0.02;
    problem.verify.trials = 20;
    problem.verify.delta_xhat = 0.5;
    problem.verify.alpha = 0.05;
  }
};

TEST(RefineBound, PassingTopIsReturnedImmediately) {
  RefineFixture f(0.1);
  const auto r = refine_bound(f.problem, 5.0, 8);
  ASSERT_EQ(r.history.size(), 1u);
  EXPECT_EQ(r.beta_final, 5.0);
  EXPECT_TRUE(r.verification.pass);
  EXPECT_EQ(r.plan.nodes(), (std::vector<std::size_t>{0, 1, 2}));
}

TEST(RefineBound, NoPlanAtZeroThrows) {
  RefineFixture f(0.1);
  f.problem.noise = {5.0, 0.0};  // every plan fails
  EXPECT_THROW(refine_bound(f.problem, 5.0, 8), NoFeasiblePlan);
}

TEST(RefineBound, BisectionKeepsLargestPassingBeta) {
  // zero increments: every beta finds the plan; noise makes it fail only
  // through the MC check, so the top fails and bottom must fail too
  RefineFixture f(0.0);
  f.problem.noise = {5.0, 0.0};
  EXPECT_THROW(refine_bound(f.problem, 1.0, 4), NoFeasiblePlan);
}

}  // namespace
}  // namespace pplan
