#pragma once

#include "drivestyle/config.hpp"
#include "drivestyle/features.hpp"
#include "drivestyle/smpc.hpp"
#include "drivestyle/spline.hpp"

#include <optional>
#include <vector>

namespace drivestyle {

/// 1 for every feature the learner uses, 0 otherwise.
FeatureVector feature_mask(FeatureSet set);

/// settings.theta_init if set, otherwise 1 / omega componentwise.
WeightVector initial_weights(const LearnerSettings& settings, const FeatureScaling& scaling);

/// Inner-problem cost theta . (mask * scaled features) of a trajectory.
double trajectory_cost(const WeightVector& theta, const SplineTrajectory& ev,
                       const FeatureModel& model, FeatureSet set,
                       const std::optional<TriggerInfo>& frozen_trigger = std::nullopt);

/// Cost together with its gradient w.r.t. the control points c_1..c_S
/// (6 * S values; c_0 is fixed), trigger and turn time held at their values
/// for `ev`.
double trajectory_cost_gradient(const WeightVector& theta, const SplineTrajectory& ev,
                                const FeatureModel& model, FeatureSet set,
                                const std::optional<TriggerInfo>& frozen_trigger,
                                Eigen::VectorXd& gradient);

struct InnerResult {
  SplineTrajectory trajectory;
  double initial_cost = 0.0;
  double final_cost = 0.0;
  int iterations = 0;
  bool converged = false;
  bool stalled = false;  ///< line search could not decrease the cost further
};

/// Minimizes the trajectory cost over c_1..c_S starting from `init` with
/// L-BFGS and backtracking. c_0 is never modified and the returned cost
/// never exceeds the initial one. With settings.restarts > 0, additional
/// searches start from seeded perturbations of `init` and the best is kept.
InnerResult optimize_trajectory(const WeightVector& theta, const SplineTrajectory& init,
                                const FeatureModel& model, const LearnerSettings& settings,
                                const std::optional<TriggerInfo>& frozen_trigger = std::nullopt);

struct OuterGradient {
  FeatureVector gradient;   ///< masked f(r*) - f(r_D), scaled features
  FeatureVector features;   ///< scaled features of r*
  InnerResult inner;
};

/// Reproduces a trajectory for theta (initialized at `demo`) and returns the
/// feature-matching gradient. `demo_features` must be scaled with the same
/// coefficients as `model`.
OuterGradient outer_gradient(const WeightVector& theta, const SplineTrajectory& demo,
                             const FeatureVector& demo_features, const FeatureModel& model,
                             const LearnerSettings& settings);

struct LearningStep {
  int iteration = 0;          ///< 1-based
  WeightVector theta;         ///< weights used to reproduce this iterate
  FeatureVector features;     ///< scaled features of the reproduced trajectory
  double epsilon = 0.0;       ///< learning error || f(r*) - f(r_D) ||
  double alpha = 0.0;         ///< learning rate applied after this iterate
  int inner_iterations = 0;
  double wall_time = 0.0;     ///< seconds spent on this iteration
};

struct LearningResult {
  WeightVector theta_star;            ///< weights with minimal epsilon
  SplineTrajectory reproduced;        ///< reproduction under theta_star
  FeatureVector demo_features;        ///< scaled, masked
  std::vector<LearningStep> history;
  int best_iteration = 0;
  bool terminated = false;            ///< increment rule met (false: iteration cap)
};

/// Feature-matching weight learning: theta <- max(0, theta + alpha * (f(r*) - f(r_D)))
/// until |eps_i - eps_{i-1}| < eps_bar or max_outer iterations. alpha is halved
/// whenever the error increases.
LearningResult learn(const SplineTrajectory& demo, const FeatureModel& model,
                     const LearnerSettings& settings);

/// Converts the record's EV and TV samples to splines and learns against them.
LearningResult learn(const DemonstrationRecord& demo, const ScenarioConfig& config);

}  // namespace drivestyle
