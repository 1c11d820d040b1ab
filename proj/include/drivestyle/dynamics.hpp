#pragma once

#include <Eigen/Core>

#include <string_view>
#include <vector>

namespace drivestyle {

/// Pose and speed of one vehicle: [x, y, phi, v].
struct VehicleState {
  double x = 0.0;    ///< longitudinal position [m]
  double y = 0.0;    ///< lateral position [m]
  double phi = 0.0;  ///< heading [rad]
  double v = 0.0;    ///< speed [m/s]

  friend bool operator==(const VehicleState&, const VehicleState&) = default;
};

/// Acceleration and front steering angle.
struct ControlInput {
  double a = 0.0;      ///< [m/s^2]
  double delta = 0.0;  ///< [rad]

  friend bool operator==(const ControlInput&, const ControlInput&) = default;
};

struct VehicleGeometry {
  double l_f = 2.0;  ///< center of mass to front axle [m]
  double l_r = 2.0;  ///< center of mass to rear axle [m]
  double length = 5.0;
  double width = 2.0;
};

struct Interval {
  double min = 0.0;
  double max = 0.0;

  bool contains(double value) const { return value >= min && value <= max; }
};

/// Admissible state set (y, phi, v) and input set (a, delta).
struct StateInputBounds {
  Interval y;
  Interval phi;
  Interval v;
  Interval a;
  Interval delta;
};

enum class BoundViolation { lateral_position, heading, speed, acceleration, steering };

std::string_view to_string(BoundViolation violation);

/// Explicit-Euler step of the kinematic single-track model with slip angle
///   beta = atan(l_r / (l_f + l_r) * tan(delta)).
/// Position advances with the current speed; throws std::invalid_argument on
/// non-finite inputs or dt <= 0.
VehicleState step(const VehicleState& state, const ControlInput& input, double dt,
                  const VehicleGeometry& geom);

/// Partial derivatives of `step` with respect to state and input.
struct StepJacobian {
  Eigen::Matrix4d wrt_state;
  Eigen::Matrix<double, 4, 2> wrt_input;
};

StepJacobian step_jacobian(const VehicleState& state, const ControlInput& input, double dt,
                           const VehicleGeometry& geom);

/// Returns every bound the pair violates; empty when admissible.
std::vector<BoundViolation> check_admissible(const VehicleState& state, const ControlInput& input,
                                             const StateInputBounds& bounds);

inline Eigen::Vector4d to_vector(const VehicleState& s) { return {s.x, s.y, s.phi, s.v}; }

inline VehicleState to_state(const Eigen::Vector4d& v) { return {v[0], v[1], v[2], v[3]}; }

}  // namespace drivestyle
