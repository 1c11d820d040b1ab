#pragma once

#include "drivestyle/config.hpp"
#include "drivestyle/dynamics.hpp"
#include "drivestyle/scenario.hpp"
#include "drivestyle/smpc.hpp"
#include "drivestyle/spline.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <random>
#include <vector>

namespace drivestyle::testing {

inline ScenarioConfig shipped_config() {
  return load_scenario(DRIVESTYLE_SCENARIO_DIR "/paper.scenario");
}

/// Demonstration of the paper scenario, computed once per test binary.
inline const DemonstrationRecord& shipped_demo() {
  static const DemonstrationRecord record = run_closed_loop(shipped_config());
  return record;
}

/// 1000 sub-steps of the continuous kinematic bicycle model.
inline VehicleState fine_step(VehicleState s, const ControlInput& u, double dt,
                              const VehicleGeometry& g, int substeps = 1000) {
  const double beta = std::atan(g.l_r / (g.l_f + g.l_r) * std::tan(u.delta));
  const double h = dt / substeps;
  for (int k = 0; k < substeps; ++k) {
    // midpoint rule per sub-step
    const double vm = s.v + 0.5 * h * u.a;
    const double phim = s.phi + 0.5 * h * (s.v / g.l_r) * std::sin(beta);
    s.x += h * vm * std::cos(phim + beta);
    s.y += h * vm * std::sin(phim + beta);
    s.phi += h * (vm / g.l_r) * std::sin(beta);
    s.v += h * u.a;
  }
  return s;
}

inline ControlPoint random_control_point(std::mt19937_64& rng, double scale = 1.0) {
  std::uniform_real_distribution<double> u(-scale, scale);
  ControlPoint c;
  for (std::size_t i = 0; i < ControlPoint::kSize; ++i) c[i] = u(rng);
  return c;
}

/// Random spline on a uniform grid of `segments` intervals of length h.
inline SplineTrajectory random_spline(std::mt19937_64& rng, std::size_t segments, double h,
                                      double scale = 1.0) {
  std::vector<double> knots;
  std::vector<ControlPoint> points;
  for (std::size_t j = 0; j <= segments; ++j) {
    knots.push_back(h * static_cast<double>(j));
    points.push_back(random_control_point(rng, scale));
  }
  return {std::move(knots), std::move(points)};
}

/// Straight constant-velocity motion along x sampled on a uniform grid.
inline SplineTrajectory straight_line(double x0, double y, double vx, double ax, double T,
                                      std::size_t segments) {
  std::vector<double> knots;
  std::vector<ControlPoint> points;
  for (std::size_t j = 0; j <= segments; ++j) {
    const double t = T * static_cast<double>(j) / static_cast<double>(segments);
    knots.push_back(t);
    points.push_back({x0 + vx * t + 0.5 * ax * t * t, vx + ax * t, ax, y, 0.0, 0.0});
  }
  return {std::move(knots), std::move(points)};
}

}  // namespace drivestyle::testing
