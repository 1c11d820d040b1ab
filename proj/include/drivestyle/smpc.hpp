#pragma once

#include "drivestyle/config.hpp"
#include "drivestyle/dynamics.hpp"
#include "drivestyle/spline.hpp"

#include <string_view>
#include <vector>

namespace drivestyle {

/// Gaussian prediction of the target vehicle center. Index k = 0..N, where
/// k = 0 is the current position; the constraint uses k = 1..N.
struct TvPrediction {
  std::vector<Vec2> mean;
  std::vector<double> sigma;

  int horizon() const { return static_cast<int>(mean.size()) - 1; }
};

/// Constant-velocity mean along the current heading; sigma_k = sigma0 + k * growth.
TvPrediction predict_tv(const VehicleState& tv, int horizon, double Ts, double sigma0,
                        double sigma_growth);

/// dx^2/l_a^2 + dy^2/l_b^2 - 1; nonnegative outside the ellipse.
double ellipse_margin(double dx, double dy, const SafetyEllipse& ellipse);

/// Standard normal quantile. Throws std::invalid_argument unless 0 < p < 1.
double normal_quantile(double p);

/// Both semi-axes inflated by z_p * sigma, so that requiring the margin of the
/// inflated ellipse around the predicted mean to be nonnegative enforces
/// Pr(margin >= 0) >= p. Axes are floored at 1e-6 m when p < 0.5 shrinks them.
SafetyEllipse tightened_ellipse(const SafetyEllipse& ellipse, double sigma);

enum class SolverStatus { converged, max_iterations, infeasible_relaxed };

std::string_view to_string(SolverStatus status);

struct OcpSolution {
  std::vector<ControlInput> inputs;   ///< N inputs
  std::vector<VehicleState> states;   ///< N + 1 predicted states, states[0] = current
  double objective = 0.0;             ///< tracking cost J
  SolverStatus status = SolverStatus::converged;
  int iterations = 0;                 ///< inner quasi-Newton iterations, all subproblems
  double max_violation = 0.0;         ///< largest violation over all scaled constraints
  /// Merit values of every inner iteration, one trace per subproblem.
  std::vector<std::vector<double>> merit_traces;
};

/// Solves the chance-constrained tracking OCP by single shooting over the
/// input sequence. Input bounds are handled by projection; state bounds and
/// the tightened ellipse constraints at k = 1..N by an augmented Lagrangian.
/// When no feasible point is found the constraints fall back to a quadratic
/// penalty and the status reads infeasible_relaxed.
///
/// `warm_start` (N inputs), when given, seeds the input sequence.
OcpSolution solve_ocp(const VehicleState& ev_state, const TvPrediction& tv_prediction,
                      const ScenarioConfig& config,
                      const std::vector<ControlInput>* warm_start = nullptr);

/// Tracking cost J of an input sequence from `ev_state`.
double tracking_cost(const VehicleState& ev_state, const std::vector<ControlInput>& inputs,
                     const ScenarioConfig& config);

struct DemonstrationRecord {
  double Ts = 0.2;
  std::vector<double> times;
  std::vector<VehicleState> ev_states;
  std::vector<VehicleState> tv_states;
  std::vector<ControlInput> inputs;     ///< one per transition
  std::vector<SolverStatus> statuses;   ///< one per transition
};

/// Receding-horizon run against the scripted constant-velocity TV; produces
/// config.sample_count() samples. Throws std::runtime_error on a non-finite state.
DemonstrationRecord run_closed_loop(const ScenarioConfig& config);

/// Scripted TV on a uniform grid of `samples` points starting at tv_initial.
std::vector<VehicleState> scripted_tv_states(const ScenarioConfig& config, int samples);

/// Spline of the scripted TV on the same grid as a demonstration.
SplineTrajectory scripted_tv_trajectory(const ScenarioConfig& config, int samples);

}  // namespace drivestyle
