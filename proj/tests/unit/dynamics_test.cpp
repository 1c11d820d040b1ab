#include "drivestyle/dynamics.hpp"

#include "support.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>

namespace drivestyle {
namespace {

const VehicleGeometry kGeom{};

TEST(Step, StraightCoast) {
  const VehicleState s = step({0, 0, 0, 10}, {0, 0}, 0.2, kGeom);
  EXPECT_DOUBLE_EQ(s.x, 2.0);
  EXPECT_EQ(s.y, 0.0);
  EXPECT_EQ(s.phi, 0.0);
  EXPECT_EQ(s.v, 10.0);
}

TEST(Step, PositionUsesCurrentSpeed) {
  const VehicleState s = step({0, 0, 0, 10}, {1, 0}, 0.2, kGeom);
  EXPECT_DOUBLE_EQ(s.x, 2.0);
  EXPECT_EQ(s.y, 0.0);
  EXPECT_EQ(s.phi, 0.0);
  EXPECT_DOUBLE_EQ(s.v, 10.2);
}

TEST(Step, HeadingChangeMatchesFineIntegration) {
  const VehicleState start{0, 0, 0, 10};
  const ControlInput u{0, 0.05};
  const VehicleState euler = step(start, u, 0.2, kGeom);
  const VehicleState fine = testing::fine_step(start, u, 0.2, kGeom);
  EXPECT_NEAR(euler.phi, 0.0250, 5e-5);
  EXPECT_NEAR(euler.phi, fine.phi, 1e-3);
}

TEST(Step, CoastPreservesSpeedAndHeading) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> heading(-0.05, 0.05);
  std::uniform_real_distribution<double> speed(0.0, 70.0);
  for (int i = 0; i < 100; ++i) {
    const VehicleState s{10.0, 3.0, heading(rng), speed(rng)};
    const VehicleState n = step(s, {0, 0}, 0.2, kGeom);
    EXPECT_EQ(n.v, s.v);
    EXPECT_EQ(n.phi, s.phi);
    EXPECT_NEAR(n.x, s.x + 0.2 * s.v * std::cos(s.phi), 1e-12);
    EXPECT_NEAR(n.y, s.y + 0.2 * s.v * std::sin(s.phi), 1e-12);
  }
}

TEST(Step, Deterministic) {
  const VehicleState s{1.25, -0.5, 0.01, 17.3};
  const ControlInput u{0.7, -0.03};
  const VehicleState a = step(s, u, 0.2, kGeom);
  const VehicleState b = step(s, u, 0.2, kGeom);
  EXPECT_EQ(a, b);
}

TEST(Step, RejectsNonFiniteInputsAndBadStep) {
  const double nan = std::numeric_limits<double>::quiet_NaN();
  EXPECT_THROW(step({nan, 0, 0, 10}, {0, 0}, 0.2, kGeom), std::invalid_argument);
  EXPECT_THROW(step({0, 0, 0, 10}, {0, std::numeric_limits<double>::infinity()}, 0.2, kGeom),
               std::invalid_argument);
  EXPECT_THROW(step({0, 0, 0, 10}, {0, 0}, 0.0, kGeom), std::invalid_argument);
  EXPECT_THROW(step({0, 0, 0, 10}, {0, 0}, -0.2, kGeom), std::invalid_argument);
}

// Over the whole admissible box the one-step error is second order in dt:
// 0.5 dt^2 (|a| + v^2 |sin beta| / l_r) bounds it.
TEST(Step, PositionErrorIsSecondOrderOverBounds) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> heading(-0.05, 0.05), speed(0.0, 70.0),
      accel(-9.0, 6.0), steer(-0.05, 0.05);
  const double dt = 0.2;
  for (int i = 0; i < 200; ++i) {
    const VehicleState s{0.0, 5.0, heading(rng), speed(rng)};
    const ControlInput u{accel(rng), steer(rng)};
    const VehicleState e = step(s, u, dt, kGeom);
    const VehicleState f = testing::fine_step(s, u, dt, kGeom);
    const double beta = std::atan(0.5 * std::tan(u.delta));
    const double bound =
        0.5 * dt * dt * (std::abs(u.a) + s.v * s.v * std::abs(std::sin(beta)) / kGeom.l_r);
    EXPECT_LE(std::hypot(e.x - f.x, e.y - f.y), 1.05 * bound + 1e-9);
    EXPECT_NEAR(e.v, f.v, 1e-9);
  }
}

TEST(StepJacobian, MatchesFiniteDifferences) {
  const VehicleState s{3.0, 4.0, 0.02, 22.0};
  const ControlInput u{0.5, 0.03};
  const StepJacobian jac = step_jacobian(s, u, 0.2, kGeom);
  const double h = 1e-6;
  for (int i = 0; i < 4; ++i) {
    Eigen::Vector4d p = to_vector(s), m = to_vector(s);
    p[i] += h;
    m[i] -= h;
    const Eigen::Vector4d d =
        (to_vector(step(to_state(p), u, 0.2, kGeom)) - to_vector(step(to_state(m), u, 0.2, kGeom))) /
        (2 * h);
    EXPECT_LT((d - jac.wrt_state.col(i)).norm(), 1e-7) << "state column " << i;
  }
  for (int i = 0; i < 2; ++i) {
    ControlInput p = u, m = u;
    (i == 0 ? p.a : p.delta) += h;
    (i == 0 ? m.a : m.delta) -= h;
    const Eigen::Vector4d d =
        (to_vector(step(s, p, 0.2, kGeom)) - to_vector(step(s, m, 0.2, kGeom))) / (2 * h);
    EXPECT_LT((d - jac.wrt_input.col(i)).norm(), 1e-6) << "input column " << i;
  }
}

TEST(CheckAdmissible, ScenarioInitialStateIsAdmissible) {
  const ScenarioConfig config = testing::shipped_config();
  EXPECT_TRUE(check_admissible({80, 2.625, 0, 25}, {0, 0}, config.bounds).empty());
}

TEST(CheckAdmissible, SpeedAboveLimit) {
  const ScenarioConfig config = testing::shipped_config();
  const auto v = check_admissible({80, 2.625, 0, 71}, {0, 0}, config.bounds);
  ASSERT_EQ(v.size(), 1u);
  EXPECT_EQ(v[0], BoundViolation::speed);
  EXPECT_EQ(to_string(v[0]), "speed-bound");
}

TEST(CheckAdmissible, SteeringBelowLimit) {
  const ScenarioConfig config = testing::shipped_config();
  const auto v = check_admissible({80, 2.625, 0, 25}, {0, -0.06}, config.bounds);
  ASSERT_EQ(v.size(), 1u);
  EXPECT_EQ(v[0], BoundViolation::steering);
  EXPECT_EQ(to_string(v[0]), "steering-bound");
}

TEST(CheckAdmissible, ReportsEveryViolation) {
  const ScenarioConfig config = testing::shipped_config();
  const auto v = check_admissible({0, 20, 0.1, -1}, {7, 0.1}, config.bounds);
  EXPECT_EQ(v.size(), 5u);
}

}  // namespace
}  // namespace drivestyle
