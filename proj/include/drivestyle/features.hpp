#pragma once

#include "drivestyle/config.hpp"
#include "drivestyle/feature_vector.hpp"
#include "drivestyle/spline.hpp"

#include <Eigen/Core>

namespace drivestyle {

/// Squared elliptical distance dx^2/l_a^2 + dy^2/l_b^2.
double elliptical_index(double dx, double dy, double l_a, double l_b);

/// Reaction window opened the first time the elliptical index drops below
/// lambda. window_end is clamped to the end of the trajectory.
struct TriggerInfo {
  bool triggered = false;
  double t_trg = 0.0;
  double window_end = 0.0;

  friend bool operator==(const TriggerInfo&, const TriggerInfo&) = default;
};

/// Scans the EV knot grid. The TV trajectory must cover every EV knot time.
TriggerInfo detect_trigger(const SplineTrajectory& ev, const SplineTrajectory& tv, double l_a,
                           double l_b, const TriggerSettings& settings);

/// First knot time where the EV is more than a quarter lane width away from
/// the initial lane center; the end time if it never leaves.
double turn_time(const SplineTrajectory& ev, const LaneContext& lane);

/// Minimum longitudinal gap used in the inverse-TIV integrand [m].
inline constexpr double kMinLongitudinalGap = 0.1;

struct FeatureDiagnostics {
  bool gap_clamped = false;  ///< the inverse-TIV integrand hit kMinLongitudinalGap
  double t_turn = 0.0;
};

/// Unscaled features of an EV trajectory against a TV trajectory.
///   - accel_x, accel_y, speed, inverse_tiv: 5-node Gauss-Legendre per segment
///   - lane and distance integrals of |.|: 50 sub-steps per segment, each
///     integrating |.| of the linear interpolant exactly
/// The three distance features are zero when `trigger` is not triggered.
FeatureVector compute_features(const SplineTrajectory& ev, const SplineTrajectory& tv,
                               const LaneContext& lane, const TriggerInfo& trigger,
                               FeatureDiagnostics* diagnostics = nullptr);

/// Row f, column 6*j + i: d feature_f / d (control point j, component i),
/// with the trigger window and turn time held fixed. Kinks of |.| use
/// sign(0) = 0.
using FeatureJacobian = Eigen::Matrix<double, static_cast<int>(kFeatureCount), Eigen::Dynamic>;

FeatureJacobian feature_jacobian(const SplineTrajectory& ev, const SplineTrajectory& tv,
                                 const LaneContext& lane, const TriggerInfo& trigger);

/// Everything needed to turn an EV trajectory into a scaled feature vector.
struct FeatureModel {
  SplineTrajectory tv;
  LaneContext lane;
  FeatureScaling scaling = FeatureScaling::standard();
  double l_a = 15.0;
  double l_b = 3.0;
  TriggerSettings trigger;

  TriggerInfo trigger_for(const SplineTrajectory& ev) const;

  /// Scaled features with the trigger recomputed from `ev`.
  FeatureVector scaled(const SplineTrajectory& ev) const;
  FeatureVector scaled(const SplineTrajectory& ev, const TriggerInfo& trig,
                       FeatureDiagnostics* diagnostics = nullptr) const;
};

FeatureModel make_feature_model(const ScenarioConfig& config, SplineTrajectory tv);

}  // namespace drivestyle
