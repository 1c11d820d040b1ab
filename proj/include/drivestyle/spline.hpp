#pragma once

#include "drivestyle/dynamics.hpp"

#include <array>
#include <span>
#include <vector>

namespace drivestyle {

/// Position, velocity and acceleration in both directions at one knot.
struct ControlPoint {
  double rx = 0.0, vx = 0.0, ax = 0.0;
  double ry = 0.0, vy = 0.0, ay = 0.0;

  static constexpr std::size_t kSize = 6;

  /// Order (rx, vx, ax, ry, vy, ay).
  double& operator[](std::size_t i);
  double operator[](std::size_t i) const;

  friend bool operator==(const ControlPoint&, const ControlPoint&) = default;
};

struct Vec2 {
  double x = 0.0;
  double y = 0.0;
};

/// Quintic in local time s = t - t_j; coefficients in ascending powers,
/// so q[0] = q_0 ... q[5] = q_5.
using Quintic = std::array<double, 6>;

struct QuinticSegment {
  Quintic x{};
  Quintic y{};
};

/// Unique quintic matching position, velocity and acceleration at s = 0 and
/// s = h along one axis.
Quintic fit_quintic(double r0, double v0, double a0, double r1, double v1, double a1, double h);

/// Throws std::invalid_argument when tj1 <= tj.
QuinticSegment fit_segment(const ControlPoint& cj, const ControlPoint& cj1, double tj, double tj1);

/// d-th derivative (d = 0, 1, 2) of a quintic at local time s.
double eval_quintic(const Quintic& q, double s, int order);

/// Weights of the six boundary values (r0, v0, a0, r1, v1, a1) in the d-th
/// derivative at local time s, for a segment of length h. The fitted quintic
/// is linear in the boundary values, so value = sum_m basis[m] * boundary[m].
std::array<double, 6> hermite_basis(double s, double h, int order);

/// C2 piecewise quintic r(t) on knots t_0 < ... < t_S, one segment per knot
/// interval, parameterized by one control point per knot.
class SplineTrajectory {
 public:
  SplineTrajectory() = default;

  /// Throws std::invalid_argument if sizes disagree, fewer than two knots,
  /// knots not strictly increasing, or any value non-finite.
  SplineTrajectory(std::vector<double> knots, std::vector<ControlPoint> points);

  std::size_t segment_count() const { return segments_.size(); }
  const std::vector<double>& knots() const { return knots_; }
  const std::vector<ControlPoint>& control_points() const { return points_; }
  const std::vector<QuinticSegment>& segments() const { return segments_; }
  double start_time() const { return knots_.front(); }
  double end_time() const { return knots_.back(); }

  /// Segment owning time t; interior knots belong to the segment on their right.
  std::size_t segment_index(double t) const;

  /// Position (0), velocity (1) or acceleration (2) at t. Throws
  /// std::out_of_range outside [t_0, t_S].
  Vec2 evaluate(double t, int order = 0) const;

  /// Same, on a known segment at local time s (no domain check).
  Vec2 evaluate_local(std::size_t segment, double s, int order) const;

  /// Copy with control points replaced; knots kept.
  SplineTrajectory with_control_points(std::vector<ControlPoint> points) const;

 private:
  std::vector<double> knots_;
  std::vector<ControlPoint> points_;
  std::vector<QuinticSegment> segments_;
};

/// Demonstration states on a uniform Ts grid to control points:
/// v^x = v cos(phi), v^y = v sin(phi), acceleration from the central speed
/// difference projected on the heading; one-sided differences at both ends.
/// Knots are i * Ts. Throws std::invalid_argument for fewer than three states.
SplineTrajectory states_to_control_points(std::span<const VehicleState> states, double Ts);

}  // namespace drivestyle
