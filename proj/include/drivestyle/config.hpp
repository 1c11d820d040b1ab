#pragma once

#include "drivestyle/dynamics.hpp"
#include "drivestyle/feature_vector.hpp"

#include <array>
#include <cstdint>
#include <optional>

namespace drivestyle {

/// Diagonal OCP weights.
struct OcpWeights {
  std::array<double, 4> state{1e-6, 0.2, 50.0, 0.2};
  std::array<double, 2> input{1.0, 10.0};
  std::array<double, 4> terminal{1e-6, 0.2, 50.0, 0.2};
};

/// Safety ellipse centered on the target vehicle, with the risk parameter p
/// (required probability of staying outside).
struct SafetyEllipse {
  double l_a = 15.0;
  double l_b = 3.0;
  double p = 0.7;
};

struct SolverOptions {
  int max_iterations = 200;
  double tolerance = 1e-6;
  double soft_penalty = 1e4;
};

struct SmpcSettings {
  int horizon = 10;
  double Ts = 0.2;
  double duration = 6.2;
  OcpWeights weights;
  SafetyEllipse ellipse;
  double sigma0 = 0.2;        ///< TV position std-dev at k = 0 [m]
  double sigma_growth = 1.15; ///< added std-dev per prediction step [m]
  SolverOptions solver;
};

/// Lane targets and speed references used by the features and the OCP
/// reference (y_ref = l_target, v_ref = v_des, phi_ref = 0).
struct LaneContext {
  double v_des = 30.0;
  double v_lane = 30.0;
  double l_des = 7.875;
  double l_initial = 2.625;
  double l_target = 7.875;
  double lane_width = 5.25;
  double end_window = 1.0;  ///< length of the end-lane window [s]
};

struct TriggerSettings {
  double lambda = 1.82;
  double reaction_time = 2.0;  ///< T_rct [s]
};

enum class FeatureSet { basic, reactive };

struct LearnerSettings {
  double alpha = 0.05;
  double eps_bar = 0.01;
  int max_outer = 100;
  int max_inner = 300;
  double inner_tol = 1e-6;
  bool freeze_trigger = false;
  FeatureSet feature_set = FeatureSet::reactive;
  /// Starting weights; unset means unit effective weight per feature, theta_k = 1 / omega_k.
  std::optional<WeightVector> theta_init;
  std::uint64_t seed = 0;
  int restarts = 0;
  FeatureScaling scaling = FeatureScaling::standard();
  TriggerSettings trigger;
};

struct ScenarioConfig {
  int lane_count = 3;
  VehicleGeometry geometry;
  VehicleState ev_initial{80.0, 2.625, 0.0, 25.0};
  VehicleState tv_initial{60.0, 7.875, 0.0, 28.0};
  StateInputBounds bounds{{2.0, 13.75}, {-0.05, 0.05}, {0.0, 70.0}, {-9.0, 6.0}, {-0.05, 0.05}};
  SmpcSettings smpc;
  LaneContext lane;
  LearnerSettings learner;

  /// Number of closed-loop samples, round(duration / Ts).
  int sample_count() const;
};

}  // namespace drivestyle
