#include "drivestyle/spline.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace drivestyle {

double& ControlPoint::operator[](std::size_t i) {
  switch (i) {
    case 0: return rx;
    case 1: return vx;
    case 2: return ax;
    case 3: return ry;
    case 4: return vy;
    case 5: return ay;
    default: throw std::out_of_range("ControlPoint index " + std::to_string(i));
  }
}

double ControlPoint::operator[](std::size_t i) const {
  return const_cast<ControlPoint&>(*this)[i];
}

Quintic fit_quintic(double r0, double v0, double a0, double r1, double v1, double a1, double h) {
  const double h2 = h * h;
  const double h3 = h2 * h;
  Quintic q;
  q[0] = r0;
  q[1] = v0;
  q[2] = 0.5 * a0;
  q[3] = (20.0 * (r1 - r0) - (8.0 * v1 + 12.0 * v0) * h - (3.0 * a0 - a1) * h2) / (2.0 * h3);
  q[4] = (30.0 * (r0 - r1) + (14.0 * v1 + 16.0 * v0) * h + (3.0 * a0 - 2.0 * a1) * h2) /
         (2.0 * h3 * h);
  q[5] = (12.0 * (r1 - r0) - 6.0 * (v1 + v0) * h - (a0 - a1) * h2) / (2.0 * h3 * h2);
  return q;
}

QuinticSegment fit_segment(const ControlPoint& cj, const ControlPoint& cj1, double tj, double tj1) {
  if (!(tj1 > tj)) {
    throw std::invalid_argument("fit_segment: knot times must be strictly increasing");
  }
  const double h = tj1 - tj;
  return {fit_quintic(cj.rx, cj.vx, cj.ax, cj1.rx, cj1.vx, cj1.ax, h),
          fit_quintic(cj.ry, cj.vy, cj.ay, cj1.ry, cj1.vy, cj1.ay, h)};
}

double eval_quintic(const Quintic& q, double s, int order) {
  switch (order) {
    case 0:
      return ((((q[5] * s + q[4]) * s + q[3]) * s + q[2]) * s + q[1]) * s + q[0];
    case 1:
      return (((5.0 * q[5] * s + 4.0 * q[4]) * s + 3.0 * q[3]) * s + 2.0 * q[2]) * s + q[1];
    case 2:
      return ((20.0 * q[5] * s + 12.0 * q[4]) * s + 6.0 * q[3]) * s + 2.0 * q[2];
    default:
      throw std::invalid_argument("eval_quintic: order must be 0, 1 or 2");
  }
}

std::array<double, 6> hermite_basis(double s, double h, int order) {
  std::array<double, 6> basis{};
  for (std::size_t m = 0; m < 6; ++m) {
    std::array<double, 6> unit{};
    unit[m] = 1.0;
    basis[m] = eval_quintic(fit_quintic(unit[0], unit[1], unit[2], unit[3], unit[4], unit[5], h),
                            s, order);
  }
  return basis;
}

SplineTrajectory::SplineTrajectory(std::vector<double> knots, std::vector<ControlPoint> points)
    : knots_(std::move(knots)), points_(std::move(points)) {
  if (knots_.size() < 2) {
    throw std::invalid_argument("SplineTrajectory: need at least two knots");
  }
  if (knots_.size() != points_.size()) {
    throw std::invalid_argument("SplineTrajectory: knot and control point counts differ");
  }
  for (std::size_t j = 0; j < knots_.size(); ++j) {
    if (!std::isfinite(knots_[j])) {
      throw std::invalid_argument("SplineTrajectory: non-finite knot");
    }
    for (std::size_t i = 0; i < ControlPoint::kSize; ++i) {
      if (!std::isfinite(points_[j][i])) {
        throw std::invalid_argument("SplineTrajectory: non-finite control point " +
                                    std::to_string(j));
      }
    }
  }
  segments_.reserve(knots_.size() - 1);
  for (std::size_t j = 0; j + 1 < knots_.size(); ++j) {
    segments_.push_back(fit_segment(points_[j], points_[j + 1], knots_[j], knots_[j + 1]));
  }
}

std::size_t SplineTrajectory::segment_index(double t) const {
  const auto it = std::upper_bound(knots_.begin(), knots_.end(), t);
  const auto idx = static_cast<std::size_t>(std::max<std::ptrdiff_t>(it - knots_.begin() - 1, 0));
  return std::min(idx, segments_.size() - 1);
}

Vec2 SplineTrajectory::evaluate(double t, int order) const {
  if (!(t >= start_time() && t <= end_time())) {
    throw std::out_of_range("SplineTrajectory::evaluate: t = " + std::to_string(t) +
                            " outside [" + std::to_string(start_time()) + ", " +
                            std::to_string(end_time()) + "]");
  }
  const std::size_t j = segment_index(t);
  return evaluate_local(j, t - knots_[j], order);
}

Vec2 SplineTrajectory::evaluate_local(std::size_t segment, double s, int order) const {
  const QuinticSegment& seg = segments_[segment];
  return {eval_quintic(seg.x, s, order), eval_quintic(seg.y, s, order)};
}

SplineTrajectory SplineTrajectory::with_control_points(std::vector<ControlPoint> points) const {
  return SplineTrajectory(knots_, std::move(points));
}

SplineTrajectory states_to_control_points(std::span<const VehicleState> states, double Ts) {
  if (states.size() < 3) {
    throw std::invalid_argument("states_to_control_points: need at least three states");
  }
  if (!(Ts > 0.0)) {
    throw std::invalid_argument("states_to_control_points: Ts must be positive");
  }
  const std::size_t n = states.size();
  std::vector<double> knots(n);
  std::vector<ControlPoint> points(n);
  for (std::size_t i = 0; i < n; ++i) {
    const VehicleState& s = states[i];
    double accel = 0.0;
    if (i == 0) {
      accel = (states[1].v - states[0].v) / Ts;
    } else if (i == n - 1) {
      accel = (states[n - 1].v - states[n - 2].v) / Ts;
    } else {
      accel = (states[i + 1].v - states[i - 1].v) / (2.0 * Ts);
    }
    const double c = std::cos(s.phi);
    const double sn = std::sin(s.phi);
    knots[i] = static_cast<double>(i) * Ts;
    points[i] = {s.x, s.v * c, accel * c, s.y, s.v * sn, accel * sn};
  }
  return SplineTrajectory(std::move(knots), std::move(points));
}

}  // namespace drivestyle
