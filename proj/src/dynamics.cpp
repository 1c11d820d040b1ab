#include "drivestyle/dynamics.hpp"

#include <cmath>
#include <stdexcept>

namespace drivestyle {

namespace {

bool finite(const VehicleState& s) {
  return std::isfinite(s.x) && std::isfinite(s.y) && std::isfinite(s.phi) && std::isfinite(s.v);
}

double slip_angle(double delta, const VehicleGeometry& geom) {
  return std::atan(geom.l_r / (geom.l_f + geom.l_r) * std::tan(delta));
}

}  // namespace

std::string_view to_string(BoundViolation violation) {
  switch (violation) {
    case BoundViolation::lateral_position:
      return "lateral-bound";
    case BoundViolation::heading:
      return "heading-bound";
    case BoundViolation::speed:
      return "speed-bound";
    case BoundViolation::acceleration:
      return "acceleration-bound";
    case BoundViolation::steering:
      return "steering-bound";
  }
  return "unknown-bound";
}

VehicleState step(const VehicleState& state, const ControlInput& input, double dt,
                  const VehicleGeometry& geom) {
  if (!(dt > 0.0) || !std::isfinite(dt)) {
    throw std::invalid_argument("step: dt must be positive and finite");
  }
  if (!finite(state) || !std::isfinite(input.a) || !std::isfinite(input.delta)) {
    throw std::invalid_argument("step: non-finite state or input");
  }
  const double beta = slip_angle(input.delta, geom);
  VehicleState next;
  next.x = state.x + dt * state.v * std::cos(state.phi + beta);
  next.y = state.y + dt * state.v * std::sin(state.phi + beta);
  next.phi = state.phi + dt * (state.v / geom.l_r) * std::sin(beta);
  next.v = state.v + dt * input.a;
  return next;
}

StepJacobian step_jacobian(const VehicleState& state, const ControlInput& input, double dt,
                           const VehicleGeometry& geom) {
  const double ratio = geom.l_r / (geom.l_f + geom.l_r);
  const double tan_delta = std::tan(input.delta);
  const double beta = std::atan(ratio * tan_delta);
  // d(beta)/d(delta) = ratio * sec^2(delta) / (1 + (ratio * tan(delta))^2)
  const double dbeta = ratio * (1.0 + tan_delta * tan_delta) /
                       (1.0 + ratio * ratio * tan_delta * tan_delta);
  const double c = std::cos(state.phi + beta);
  const double s = std::sin(state.phi + beta);

  StepJacobian jac;
  jac.wrt_state.setIdentity();
  jac.wrt_state(0, 2) = -dt * state.v * s;
  jac.wrt_state(0, 3) = dt * c;
  jac.wrt_state(1, 2) = dt * state.v * c;
  jac.wrt_state(1, 3) = dt * s;
  jac.wrt_state(2, 3) = dt * std::sin(beta) / geom.l_r;

  jac.wrt_input.setZero();
  jac.wrt_input(0, 1) = -dt * state.v * s * dbeta;
  jac.wrt_input(1, 1) = dt * state.v * c * dbeta;
  jac.wrt_input(2, 1) = dt * (state.v / geom.l_r) * std::cos(beta) * dbeta;
  jac.wrt_input(3, 0) = dt;
  return jac;
}

std::vector<BoundViolation> check_admissible(const VehicleState& state, const ControlInput& input,
                                             const StateInputBounds& bounds) {
  std::vector<BoundViolation> violated;
  if (!bounds.y.contains(state.y)) violated.push_back(BoundViolation::lateral_position);
  if (!bounds.phi.contains(state.phi)) violated.push_back(BoundViolation::heading);
  if (!bounds.v.contains(state.v)) violated.push_back(BoundViolation::speed);
  if (!bounds.a.contains(input.a)) violated.push_back(BoundViolation::acceleration);
  if (!bounds.delta.contains(input.delta)) violated.push_back(BoundViolation::steering);
  return violated;
}

}  // namespace drivestyle
