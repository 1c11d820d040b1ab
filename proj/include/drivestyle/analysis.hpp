#pragma once

#include "drivestyle/features.hpp"
#include "drivestyle/learner.hpp"
#include "drivestyle/spline.hpp"
#include "drivestyle/trajectory_io.hpp"

#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace drivestyle {

struct XWindow {
  double min = 0.0;
  double max = 0.0;
};

struct ComparisonMetrics {
  double max_gap = 0.0;      ///< max |y_a - y_b| at equal x [m]
  double rmse = 0.0;         ///< lateral RMSE at equal x [m]
  double feature_l2 = 0.0;   ///< || f(a) - f(b) || of scaled features; NaN without a model
  std::size_t samples = 0;   ///< matched x positions
};

/// Lateral position of `traj` where its longitudinal position equals x, found
/// by bisection on the first bracketing interval; nullopt outside its x range.
std::optional<double> lateral_at_x(const SplineTrajectory& traj, double x);

/// Samples `a` 20 times per segment, keeps the samples inside `window` and
/// inside b's x range, and compares y at equal x. Throws
/// std::invalid_argument when no sample matches (disjoint ranges).
ComparisonMetrics compare_trajectories(const SplineTrajectory& a, const SplineTrajectory& b,
                                       const std::optional<XWindow>& window = std::nullopt,
                                       const FeatureModel* model = nullptr);

struct LateralRms {
  double velocity = 0.0;      ///< [m/s]
  double acceleration = 0.0;  ///< [m/s^2]
};

/// RMS difference of lateral velocity and acceleration on the knot grid of
/// `reference` (the demonstration's sample times).
LateralRms lateral_rms(const SplineTrajectory& reference, const SplineTrajectory& other);

/// Same on a uniform grid of `points` times over the common domain.
LateralRms lateral_rms_dense(const SplineTrajectory& reference, const SplineTrajectory& other,
                             int points = 2001);

using NamedTrajectory = std::pair<std::string, SplineTrajectory>;

/// x of the first trajectory's samples, then y_<name> of every trajectory at
/// that x (NaN where a trajectory does not reach it).
CsvTable xy_series(const std::vector<NamedTrajectory>& trajectories);

/// t, x, s_e of the EV knots against the TV, untightened ellipse.
CsvTable se_series(const SplineTrajectory& ev, const SplineTrajectory& tv, double l_a, double l_b);

/// t, then vx_/vy_/ax_/ay_<name> of every trajectory on the first one's knots.
CsvTable kinematics_series(const std::vector<NamedTrajectory>& trajectories);

/// iteration, epsilon.
CsvTable epsilon_series(const std::vector<LearningStep>& history);

}  // namespace drivestyle
