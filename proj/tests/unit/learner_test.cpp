#include "drivestyle/learner.hpp"

#include "support.hpp"

#include <Eigen/Dense>
#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

namespace drivestyle {
namespace {

/// Three-segment toy: EV with a lateral bump, TV far ahead.
FeatureModel toy_model() {
  FeatureModel m;
  m.tv = testing::straight_line(500.0, 7.875, 30.0, 0.0, 0.6, 3);
  return m;
}

SplineTrajectory toy_init() {
  return SplineTrajectory({0.0, 0.2, 0.4, 0.6}, {{0.0, 25.0, 1.5, 2.625, 0.5, 2.0},
                                                  {5.1, 25.6, -0.5, 2.8, 1.5, 1.0},
                                                  {10.3, 25.2, 0.8, 3.2, 1.0, -2.0},
                                                  {15.4, 25.5, 0.0, 3.4, 0.2, 0.5}});
}

LearnerSettings settings_for(FeatureSet set) {
  LearnerSettings s;
  s.feature_set = set;
  return s;
}

WeightVector only(std::initializer_list<Feature> features, double value = 1.0) {
  WeightVector w;
  for (Feature f : features) w[f] = value;
  return w;
}

Eigen::VectorXd free_variables(const SplineTrajectory& ev) {
  const auto& pts = ev.control_points();
  Eigen::VectorXd x(static_cast<Eigen::Index>(6 * (pts.size() - 1)));
  for (std::size_t j = 1; j < pts.size(); ++j) {
    for (std::size_t i = 0; i < 6; ++i) x[static_cast<Eigen::Index>(6 * (j - 1) + i)] = pts[j][i];
  }
  return x;
}

SplineTrajectory with_free_variables(const SplineTrajectory& like, const Eigen::VectorXd& x) {
  auto pts = like.control_points();
  for (std::size_t j = 1; j < pts.size(); ++j) {
    for (std::size_t i = 0; i < 6; ++i) pts[j][i] = x[static_cast<Eigen::Index>(6 * (j - 1) + i)];
  }
  return like.with_control_points(pts);
}

const SplineTrajectory& shipped_ev() {
  static const SplineTrajectory ev =
      states_to_control_points(testing::shipped_demo().ev_states, testing::shipped_demo().Ts);
  return ev;
}

const FeatureModel& shipped_model() {
  static const FeatureModel model = make_feature_model(
      testing::shipped_config(),
      states_to_control_points(testing::shipped_demo().tv_states, testing::shipped_demo().Ts));
  return model;
}

TEST(FeatureMask, SelectsFirstSixForBasicSet) {
  const FeatureVector basic = feature_mask(FeatureSet::basic);
  const FeatureVector all = feature_mask(FeatureSet::reactive);
  for (std::size_t i = 0; i < kFeatureCount; ++i) {
    EXPECT_EQ(basic[i], i < kBasicFeatureCount ? 1.0 : 0.0);
    EXPECT_EQ(all[i], 1.0);
  }
}

TEST(InitialWeights, DefaultIsReciprocalScaling) {
  const WeightVector w = initial_weights(LearnerSettings{}, FeatureScaling::standard());
  EXPECT_EQ(w[Feature::accel_x], 1.0);
  EXPECT_EQ(w[Feature::initial_lane], 0.1);
  LearnerSettings s;
  s.theta_init = FeatureVector::filled(2.0);
  EXPECT_EQ(initial_weights(s, FeatureScaling::standard()), FeatureVector::filled(2.0));
}

TEST(OptimizeTrajectory, ZeroWeightsReturnInitUnchanged) {
  const InnerResult r = optimize_trajectory(WeightVector{}, toy_init(), toy_model(),
                                            settings_for(FeatureSet::reactive));
  EXPECT_EQ(r.trajectory.control_points(), toy_init().control_points());
  EXPECT_EQ(r.final_cost, 0.0);
}

TEST(OptimizeTrajectory, DesiredLaneWeightReducesLaneFeature) {
  const FeatureModel model = toy_model();
  const SplineTrajectory init = toy_init();
  const InnerResult r =
      optimize_trajectory(only({Feature::desired_lane}), init, model, settings_for(FeatureSet::basic));
  const TriggerInfo none;
  EXPECT_LT(compute_features(r.trajectory, model.tv, model.lane, none)[Feature::desired_lane],
            compute_features(init, model.tv, model.lane, none)[Feature::desired_lane]);
  EXPECT_EQ(r.trajectory.control_points().front(), init.control_points().front());
  EXPECT_LE(r.final_cost, r.initial_cost);
}

// The acceleration cost is a convex quadratic in c_1..c_S; its minimizer is
// obtained independently from a finite-difference Hessian and a dense solve,
// and confirmed by a random-restart search.
TEST(OptimizeTrajectory, AccelerationCostMatchesBruteForceOracle) {
  const FeatureModel model = toy_model();
  const SplineTrajectory init = toy_init();
  const WeightVector theta = only({Feature::accel_x, Feature::accel_y});
  auto cost = [&](const Eigen::VectorXd& x) {
    const FeatureVector f = compute_features(with_free_variables(init, x), model.tv, model.lane, {});
    return f[Feature::accel_x] + f[Feature::accel_y];
  };
  const Eigen::VectorXd x0 = free_variables(init);
  const Eigen::Index n = x0.size();
  // Quadratic: exact Hessian and gradient from second differences with unit steps.
  Eigen::MatrixXd H(n, n);
  Eigen::VectorXd g(n);
  const double f0 = cost(x0);
  for (Eigen::Index i = 0; i < n; ++i) {
    Eigen::VectorXd ei = Eigen::VectorXd::Zero(n);
    ei[i] = 1.0;
    g[i] = 0.5 * (cost(x0 + ei) - cost(x0 - ei));
    for (Eigen::Index j = 0; j <= i; ++j) {
      Eigen::VectorXd ej = Eigen::VectorXd::Zero(n);
      ej[j] = 1.0;
      H(i, j) = H(j, i) = 0.25 * (cost(x0 + ei + ej) - cost(x0 + ei - ej) - cost(x0 - ei + ej) +
                                   cost(x0 - ei - ej));
    }
  }
  const Eigen::VectorXd step = H.completeOrthogonalDecomposition().solve(-g);
  const double oracle_min = f0 + g.dot(step) + 0.5 * step.dot(H * step);

  LearnerSettings s = settings_for(FeatureSet::basic);
  const InnerResult r = optimize_trajectory(theta, init, model, s);
  const FeatureVector fr = compute_features(r.trajectory, model.tv, model.lane, {});
  const FeatureVector fi = compute_features(init, model.tv, model.lane, {});
  EXPECT_LE(fr[Feature::accel_x], fi[Feature::accel_x]);
  EXPECT_LE(fr[Feature::accel_y], fi[Feature::accel_y]);
  EXPECT_LE(r.final_cost - oracle_min, 0.01 * std::max(oracle_min, 1e-3 * f0));

  // Random restarts around the start never find anything better than the oracle.
  std::mt19937_64 rng(21);
  std::normal_distribution<double> noise(0.0, 1.0);
  double best = std::numeric_limits<double>::infinity();
  for (int k = 0; k < 20; ++k) {
    Eigen::VectorXd x = x0;
    for (Eigen::Index i = 0; i < n; ++i) x[i] += noise(rng);
    LearnerSettings rs = s;
    best = std::min(best, optimize_trajectory(theta, with_free_variables(init, x), model, rs).final_cost);
  }
  EXPECT_GE(best, oracle_min - 1e-6 * std::max(1.0, f0));
  EXPECT_LE(std::abs(best - oracle_min), 0.01 * std::max(oracle_min, 1e-3 * f0));
}

TEST(OptimizeTrajectory, RestartsAreSeededAndNeverWorse) {
  const FeatureModel model = toy_model();
  const WeightVector theta = only({Feature::accel_x, Feature::accel_y, Feature::desired_lane});
  LearnerSettings s = settings_for(FeatureSet::basic);
  const InnerResult plain = optimize_trajectory(theta, toy_init(), model, s);
  s.restarts = 3;
  s.seed = 17;
  const InnerResult a = optimize_trajectory(theta, toy_init(), model, s);
  const InnerResult b = optimize_trajectory(theta, toy_init(), model, s);
  EXPECT_LE(a.final_cost, plain.final_cost);
  EXPECT_EQ(a.trajectory.control_points(), b.trajectory.control_points());
}

TEST(OptimizeTrajectory, RejectsNonFiniteWeights) {
  WeightVector theta;
  theta[Feature::speed] = std::numeric_limits<double>::infinity();
  EXPECT_THROW(optimize_trajectory(theta, toy_init(), toy_model(), LearnerSettings{}),
               std::invalid_argument);
}

// Directional derivative of the inner objective against central differences,
// with weight only on the smooth features.
TEST(TrajectoryCostGradient, DirectionalDerivativeMatchesFiniteDifferences) {
  const WeightVector theta = only({Feature::accel_x, Feature::accel_y, Feature::speed, Feature::inverse_tiv});
  std::mt19937_64 rng(31);
  std::normal_distribution<double> n(0.0, 1.0);
  const SplineTrajectory& ev = shipped_ev();
  Eigen::VectorXd grad;
  trajectory_cost_gradient(theta, ev, shipped_model(), FeatureSet::reactive, std::nullopt, grad);
  const Eigen::VectorXd x = free_variables(ev);
  ASSERT_EQ(grad.size(), x.size());
  for (int trial = 0; trial < 10; ++trial) {
    Eigen::VectorXd d(x.size());
    for (Eigen::Index i = 0; i < d.size(); ++i) d[i] = n(rng);
    d.normalize();
    const double h = 1e-5;
    const double fp = trajectory_cost(theta, with_free_variables(ev, x + h * d), shipped_model(), FeatureSet::reactive);
    const double fm = trajectory_cost(theta, with_free_variables(ev, x - h * d), shipped_model(), FeatureSet::reactive);
    const double fd = (fp - fm) / (2 * h);
    EXPECT_NEAR(grad.dot(d), fd, 1e-4 * std::abs(fd)) << trial;
  }
}

TEST(TrajectoryCostGradient, CostMatchesWeightedScaledFeatures) {
  const WeightVector theta = FeatureVector::filled(0.3);
  const FeatureVector f = shipped_model().scaled(shipped_ev());
  double expected = 0.0;
  for (std::size_t i = 0; i < kBasicFeatureCount; ++i) expected += 0.3 * f[i];
  EXPECT_NEAR(trajectory_cost(theta, shipped_ev(), shipped_model(), FeatureSet::basic), expected,
              1e-12 * expected);
}

TEST(OuterGradient, ZeroAtFixedPoint) {
  const FeatureVector fd = shipped_model().scaled(shipped_ev());
  const OuterGradient og =
      outer_gradient(WeightVector{}, shipped_ev(), fd, shipped_model(), settings_for(FeatureSet::reactive));
  EXPECT_EQ(og.gradient, FeatureVector{});
  EXPECT_EQ(og.inner.trajectory.control_points(), shipped_ev().control_points());
}

TEST(OuterGradient, MatchesIndependentFeatureRecomputation) {
  const FeatureModel model = toy_model();
  const SplineTrajectory demo = toy_init();
  const FeatureVector fd = scale(compute_features(demo, model.tv, model.lane, {}), model.scaling);
  const OuterGradient og = outer_gradient(only({Feature::accel_x, Feature::accel_y}), demo, fd, model,
                                          settings_for(FeatureSet::basic));
  const FeatureVector fr = scale(
      compute_features(og.inner.trajectory, model.tv, model.lane,
                       detect_trigger(og.inner.trajectory, model.tv, model.l_a, model.l_b, model.trigger)),
      model.scaling);
  for (std::size_t i = 0; i < kFeatureCount; ++i) {
    const double expected = i < kBasicFeatureCount ? fr[i] - fd[i] : 0.0;
    EXPECT_NEAR(og.gradient[i], expected, 1e-12 * std::max(1.0, std::abs(fr[i]))) << kFeatureNames[i];
  }
}

TEST(OuterGradient, SlowReproductionRaisesSpeedComponent) {
  // Demo at the desired speed right behind a TV; penalizing the inverse TIV
  // makes the reproduction fall back, so its speed deviation grows.
  FeatureModel model;
  model.tv = testing::straight_line(30.0, 2.625, 30.0, 0.0, 3.0, 15);
  const SplineTrajectory demo = testing::straight_line(0.0, 2.625, 30.0, 0.0, 3.0, 15);
  const FeatureVector fd = model.scaled(demo);
  const OuterGradient og = outer_gradient(only({Feature::inverse_tiv}), demo, fd, model,
                                          settings_for(FeatureSet::reactive));
  EXPECT_GT(og.gradient[Feature::speed], 0.0);
  EXPECT_LT(og.gradient[Feature::inverse_tiv], 0.0);
}

TEST(Learn, InfiniteThresholdStopsAfterTwoIterations) {
  LearnerSettings s = testing::shipped_config().learner;
  s.eps_bar = std::numeric_limits<double>::infinity();
  const LearningResult r = learn(shipped_ev(), shipped_model(), s);
  EXPECT_EQ(r.history.size(), 2u);
  EXPECT_TRUE(r.terminated);
}

TEST(Learn, FixedPointKeepsWeights) {
  LearnerSettings s = testing::shipped_config().learner;
  s.theta_init = WeightVector{};
  const LearningResult r = learn(shipped_ev(), shipped_model(), s);
  ASSERT_EQ(r.history.size(), 2u);
  for (const LearningStep& step : r.history) {
    EXPECT_EQ(step.theta, WeightVector{});
    EXPECT_EQ(step.epsilon, 0.0);
  }
  EXPECT_EQ(r.reproduced.control_points(), shipped_ev().control_points());
}

TEST(Learn, DeterministicWithSeededRestarts) {
  LearnerSettings s = testing::shipped_config().learner;
  s.max_outer = 3;
  s.restarts = 1;
  s.seed = 5;
  const LearningResult a = learn(shipped_ev(), shipped_model(), s);
  const LearningResult b = learn(shipped_ev(), shipped_model(), s);
  ASSERT_EQ(a.history.size(), b.history.size());
  for (std::size_t i = 0; i < a.history.size(); ++i) {
    EXPECT_EQ(a.history[i].theta, b.history[i].theta);
    EXPECT_EQ(a.history[i].features, b.history[i].features);
    EXPECT_EQ(a.history[i].epsilon, b.history[i].epsilon);
  }
  EXPECT_EQ(a.theta_star, b.theta_star);
}

TEST(Learn, ReturnsBestIterate) {
  const LearningResult r = learn(shipped_ev(), shipped_model(), testing::shipped_config().learner);
  ASSERT_FALSE(r.history.empty());
  double best = std::numeric_limits<double>::infinity();
  for (const LearningStep& step : r.history) {
    best = std::min(best, step.epsilon);
    EXPECT_GE(step.epsilon, best);
    for (double t : step.theta.values) EXPECT_GE(t, 0.0);
  }
  const LearningStep& chosen = r.history[static_cast<std::size_t>(r.best_iteration - 1)];
  EXPECT_EQ(chosen.epsilon, best);
  EXPECT_EQ(chosen.theta, r.theta_star);
  EXPECT_TRUE(r.terminated);
  EXPECT_LE(r.history.size(), 100u);
}

TEST(Learn, BasicSetIgnoresReactiveWeights) {
  LearnerSettings s = testing::shipped_config().learner;
  s.feature_set = FeatureSet::basic;
  s.max_outer = 2;
  const LearningResult r = learn(shipped_ev(), shipped_model(), s);
  for (const LearningStep& step : r.history) {
    for (std::size_t i = kBasicFeatureCount; i < kFeatureCount; ++i) {
      EXPECT_EQ(step.theta[i], 0.0);
      EXPECT_EQ(step.features[i], 0.0);
    }
  }
}

TEST(Learn, RejectsTooShortDemonstration) {
  const SplineTrajectory two({0.0, 0.2}, {ControlPoint{}, ControlPoint{0.1, 0, 0, 0, 0, 0}});
  EXPECT_THROW(learn(two, toy_model(), LearnerSettings{}), std::invalid_argument);
}

}  // namespace
}  // namespace drivestyle
