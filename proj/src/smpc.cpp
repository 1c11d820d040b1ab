#include "drivestyle/smpc.hpp"

#include "optim.hpp"

#include <boost/math/distributions/normal.hpp>

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace drivestyle {

namespace {

constexpr int kConstraintsPerStep = 7;
constexpr int kMaxMultiplierUpdates = 30;
constexpr double kInitialPenalty = 10.0;
constexpr double kMaxPenalty = 1e8;

enum class PenaltyMode { augmented_lagrangian, quadratic };

/// Single-shooting view of the OCP over u = [a_0, delta_0, ..., a_{N-1}, delta_{N-1}].
///
/// Constraints c_i(u) >= 0 at each k = 1..N, in this order: tightened ellipse
/// margin, then y, phi and v lower/upper bounds scaled by 1 / (max - min).
class ShootingProblem {
 public:
  ShootingProblem(const VehicleState& ev_state, const TvPrediction& tv, const ScenarioConfig& config)
      : x0_(ev_state), tv_(tv), cfg_(config), N_(config.smpc.horizon) {
    if (tv.horizon() < N_) {
      throw std::invalid_argument("solve_ocp: TV prediction shorter than the horizon");
    }
    ellipses_.reserve(static_cast<std::size_t>(N_) + 1);
    for (int k = 0; k <= N_; ++k) {
      ellipses_.push_back(tightened_ellipse(config.smpc.ellipse, tv.sigma[static_cast<std::size_t>(k)]));
    }
  }

  int variables() const { return 2 * N_; }
  int constraints() const { return kConstraintsPerStep * N_; }

  std::vector<ControlInput> inputs(const Eigen::VectorXd& u) const {
    std::vector<ControlInput> out(static_cast<std::size_t>(N_));
    for (int k = 0; k < N_; ++k) out[static_cast<std::size_t>(k)] = {u[2 * k], u[2 * k + 1]};
    return out;
  }

  std::vector<VehicleState> rollout(const Eigen::VectorXd& u) const {
    std::vector<VehicleState> xs{x0_};
    xs.reserve(static_cast<std::size_t>(N_) + 1);
    for (int k = 0; k < N_; ++k) {
      xs.push_back(step(xs.back(), {u[2 * k], u[2 * k + 1]}, cfg_.smpc.Ts, cfg_.geometry));
    }
    return xs;
  }

  Eigen::Vector4d reference(int k) const {
    return {x0_.x + k * cfg_.smpc.Ts * cfg_.lane.v_des, cfg_.lane.l_target, 0.0, cfg_.lane.v_des};
  }

  double cost(const std::vector<VehicleState>& xs, const Eigen::VectorXd& u) const {
    const auto& w = cfg_.smpc.weights;
    double j = 0.0;
    for (int k = 0; k <= N_; ++k) {
      const Eigen::Vector4d e = to_vector(xs[static_cast<std::size_t>(k)]) - reference(k);
      const auto& q = (k == N_) ? w.terminal : w.state;
      for (int i = 0; i < 4; ++i) j += q[static_cast<std::size_t>(i)] * e[i] * e[i];
      if (k < N_) j += w.input[0] * u[2 * k] * u[2 * k] + w.input[1] * u[2 * k + 1] * u[2 * k + 1];
    }
    return j;
  }

  Eigen::VectorXd constraint_values(const std::vector<VehicleState>& xs) const {
    Eigen::VectorXd c(constraints());
    for (int k = 1; k <= N_; ++k) {
      const VehicleState& s = xs[static_cast<std::size_t>(k)];
      const Vec2& m = tv_.mean[static_cast<std::size_t>(k)];
      const int base = kConstraintsPerStep * (k - 1);
      c[base] = ellipse_margin(s.x - m.x, s.y - m.y, ellipses_[static_cast<std::size_t>(k)]);
      c.segment(base + 1, 6) = bound_terms(s);
    }
    return c;
  }

  /// Merit = J + penalty(c); gradient by the adjoint of the Euler rollout.
  double merit(const Eigen::VectorXd& u, Eigen::VectorXd& grad, PenaltyMode mode,
               const Eigen::VectorXd& mu, double rho) const {
    const std::vector<VehicleState> xs = rollout(u);
    const Eigen::VectorXd c = constraint_values(xs);
    double value = cost(xs, u);

    // d merit / d c_i
    Eigen::VectorXd dc(c.size());
    for (Eigen::Index i = 0; i < c.size(); ++i) {
      if (mode == PenaltyMode::augmented_lagrangian) {
        const double shifted = std::max(0.0, mu[i] - rho * c[i]);
        value += (shifted * shifted - mu[i] * mu[i]) / (2.0 * rho);
        dc[i] = -shifted;
      } else {
        const double neg = std::min(0.0, c[i]);
        value += rho * neg * neg;
        dc[i] = 2.0 * rho * neg;
      }
    }

    const auto& w = cfg_.smpc.weights;
    grad.resize(variables());
    Eigen::Vector4d lambda = state_gradient(xs, N_, w.terminal, dc);
    for (int k = N_ - 1; k >= 0; --k) {
      const VehicleState& s = xs[static_cast<std::size_t>(k)];
      const ControlInput in{u[2 * k], u[2 * k + 1]};
      const StepJacobian jac = step_jacobian(s, in, cfg_.smpc.Ts, cfg_.geometry);
      const Eigen::Vector2d gu = jac.wrt_input.transpose() * lambda;
      grad[2 * k] = 2.0 * w.input[0] * in.a + gu[0];
      grad[2 * k + 1] = 2.0 * w.input[1] * in.delta + gu[1];
      lambda = state_gradient(xs, k, w.state, dc) + jac.wrt_state.transpose() * lambda;
    }
    return value;
  }

  Eigen::VectorXd lower() const { return box(true); }
  Eigen::VectorXd upper() const { return box(false); }

 private:
  Eigen::Matrix<double, 6, 1> bound_terms(const VehicleState& s) const {
    const auto& b = cfg_.bounds;
    Eigen::Matrix<double, 6, 1> t;
    t << (s.y - b.y.min) / span(b.y), (b.y.max - s.y) / span(b.y),
        (s.phi - b.phi.min) / span(b.phi), (b.phi.max - s.phi) / span(b.phi),
        (s.v - b.v.min) / span(b.v), (b.v.max - s.v) / span(b.v);
    return t;
  }

  static double span(const Interval& i) { return std::max(i.max - i.min, 1e-9); }

  /// Partial derivative of the merit w.r.t. state k, excluding dynamics coupling.
  Eigen::Vector4d state_gradient(const std::vector<VehicleState>& xs, int k,
                                 const std::array<double, 4>& q, const Eigen::VectorXd& dc) const {
    const Eigen::Vector4d e = to_vector(xs[static_cast<std::size_t>(k)]) - reference(k);
    Eigen::Vector4d g;
    for (int i = 0; i < 4; ++i) g[i] = 2.0 * q[static_cast<std::size_t>(i)] * e[i];
    if (k == 0) return g;

    const VehicleState& s = xs[static_cast<std::size_t>(k)];
    const Vec2& m = tv_.mean[static_cast<std::size_t>(k)];
    const SafetyEllipse& el = ellipses_[static_cast<std::size_t>(k)];
    const int base = kConstraintsPerStep * (k - 1);
    const auto& b = cfg_.bounds;
    g[0] += dc[base] * 2.0 * (s.x - m.x) / (el.l_a * el.l_a);
    g[1] += dc[base] * 2.0 * (s.y - m.y) / (el.l_b * el.l_b);
    g[1] += (dc[base + 1] - dc[base + 2]) / span(b.y);
    g[2] += (dc[base + 3] - dc[base + 4]) / span(b.phi);
    g[3] += (dc[base + 5] - dc[base + 6]) / span(b.v);
    return g;
  }

  Eigen::VectorXd box(bool lo) const {
    Eigen::VectorXd v(variables());
    for (int k = 0; k < N_; ++k) {
      v[2 * k] = lo ? cfg_.bounds.a.min : cfg_.bounds.a.max;
      v[2 * k + 1] = lo ? cfg_.bounds.delta.min : cfg_.bounds.delta.max;
    }
    return v;
  }

  VehicleState x0_;
  const TvPrediction& tv_;
  const ScenarioConfig& cfg_;
  int N_;
  std::vector<SafetyEllipse> ellipses_;
};

double max_violation(const Eigen::VectorXd& c) {
  return c.size() == 0 ? 0.0 : std::max(0.0, -c.minCoeff());
}

}  // namespace

TvPrediction predict_tv(const VehicleState& tv, int horizon, double Ts, double sigma0,
                        double sigma_growth) {
  if (horizon < 1) throw std::invalid_argument("predict_tv: horizon must be >= 1");
  TvPrediction pred;
  pred.mean.reserve(static_cast<std::size_t>(horizon) + 1);
  pred.sigma.reserve(static_cast<std::size_t>(horizon) + 1);
  const double vx = tv.v * std::cos(tv.phi);
  const double vy = tv.v * std::sin(tv.phi);
  for (int k = 0; k <= horizon; ++k) {
    const double t = k * Ts;
    pred.mean.push_back({tv.x + t * vx, tv.y + t * vy});
    pred.sigma.push_back(sigma0 + k * sigma_growth);
  }
  return pred;
}

double ellipse_margin(double dx, double dy, const SafetyEllipse& ellipse) {
  return dx * dx / (ellipse.l_a * ellipse.l_a) + dy * dy / (ellipse.l_b * ellipse.l_b) - 1.0;
}

double normal_quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) {
    throw std::invalid_argument("normal_quantile: p must lie in (0, 1), got " + std::to_string(p));
  }
  return boost::math::quantile(boost::math::normal_distribution<double>(), p);
}

SafetyEllipse tightened_ellipse(const SafetyEllipse& ellipse, double sigma) {
  const double inflation = normal_quantile(ellipse.p) * sigma;
  constexpr double kMinAxis = 1e-6;
  return {std::max(ellipse.l_a + inflation, kMinAxis), std::max(ellipse.l_b + inflation, kMinAxis),
          ellipse.p};
}

std::string_view to_string(SolverStatus status) {
  switch (status) {
    case SolverStatus::converged:
      return "converged";
    case SolverStatus::max_iterations:
      return "max-iterations";
    case SolverStatus::infeasible_relaxed:
      return "infeasible-relaxed";
  }
  return "unknown";
}

OcpSolution solve_ocp(const VehicleState& ev_state, const TvPrediction& tv_prediction,
                      const ScenarioConfig& config, const std::vector<ControlInput>* warm_start) {
  const ShootingProblem problem(ev_state, tv_prediction, config);
  const int n = problem.variables();
  const SolverOptions& opts = config.smpc.solver;

  Eigen::VectorXd u = Eigen::VectorXd::Zero(n);
  if (warm_start != nullptr) {
    if (static_cast<int>(warm_start->size()) != config.smpc.horizon) {
      throw std::invalid_argument("solve_ocp: warm start length differs from the horizon");
    }
    for (int k = 0; k < config.smpc.horizon; ++k) {
      u[2 * k] = (*warm_start)[static_cast<std::size_t>(k)].a;
      u[2 * k + 1] = (*warm_start)[static_cast<std::size_t>(k)].delta;
    }
  }

  optim::Options inner;
  inner.max_iterations = opts.max_iterations;
  inner.gradient_tolerance = opts.tolerance;

  // The quasi-Newton iteration runs on z = u / scale with scale the half-width
  // of each input range, so acceleration and steering have comparable size.
  Eigen::VectorXd scale(n);
  for (int k = 0; k < config.smpc.horizon; ++k) {
    scale[2 * k] = std::max(0.5 * (config.bounds.a.max - config.bounds.a.min), 1e-6);
    scale[2 * k + 1] = std::max(0.5 * (config.bounds.delta.max - config.bounds.delta.min), 1e-6);
  }
  const Eigen::VectorXd z_lower = problem.lower().cwiseQuotient(scale);
  const Eigen::VectorXd z_upper = problem.upper().cwiseQuotient(scale);
  auto scaled = [&](PenaltyMode mode, const Eigen::VectorXd& mu, double rho) {
    return [&problem, &scale, mode, &mu, rho](const Eigen::VectorXd& z, Eigen::VectorXd& g) {
      const double value = problem.merit(z.cwiseProduct(scale), g, mode, mu, rho);
      g = g.cwiseProduct(scale);
      return value;
    };
  };

  OcpSolution sol;
  Eigen::VectorXd mu = Eigen::VectorXd::Zero(problem.constraints());
  double rho = kInitialPenalty;
  double violation = std::numeric_limits<double>::infinity();
  bool converged = false;

  for (int outer = 0; outer < kMaxMultiplierUpdates; ++outer) {
    optim::Result res = optim::minimize_box(scaled(PenaltyMode::augmented_lagrangian, mu, rho),
                                            u.cwiseQuotient(scale), z_lower, z_upper, inner);
    u = res.x.cwiseProduct(scale);
    sol.iterations += res.iterations;
    sol.merit_traces.push_back(std::move(res.trace));

    const Eigen::VectorXd c = problem.constraint_values(problem.rollout(u));
    const double prev_violation = violation;
    violation = max_violation(c);
    // A stalled line search means no representable decrease is left.
    if (violation <= opts.tolerance && (res.converged || res.stalled)) {
      converged = true;
      break;
    }
    mu = (mu - rho * c).cwiseMax(0.0);
    if (violation > 0.25 * prev_violation) rho = std::min(10.0 * rho, kMaxPenalty);
  }

  if (converged) {
    sol.status = SolverStatus::converged;
  } else if (violation <= opts.tolerance) {
    sol.status = SolverStatus::max_iterations;
  } else {
    optim::Result res = optim::minimize_box(scaled(PenaltyMode::quadratic, mu, opts.soft_penalty),
                                            u.cwiseQuotient(scale), z_lower, z_upper, inner);
    u = res.x.cwiseProduct(scale);
    sol.iterations += res.iterations;
    sol.merit_traces.push_back(std::move(res.trace));
    sol.status = SolverStatus::infeasible_relaxed;
  }

  sol.inputs = problem.inputs(u);
  sol.states = problem.rollout(u);
  sol.objective = problem.cost(sol.states, u);
  sol.max_violation = max_violation(problem.constraint_values(sol.states));
  return sol;
}

double tracking_cost(const VehicleState& ev_state, const std::vector<ControlInput>& inputs,
                     const ScenarioConfig& config) {
  ScenarioConfig local = config;
  local.smpc.horizon = static_cast<int>(inputs.size());
  const TvPrediction dummy = predict_tv({}, local.smpc.horizon, local.smpc.Ts, 0.0, 0.0);
  const ShootingProblem problem(ev_state, dummy, local);
  Eigen::VectorXd u(2 * inputs.size());
  for (std::size_t k = 0; k < inputs.size(); ++k) {
    u[static_cast<Eigen::Index>(2 * k)] = inputs[k].a;
    u[static_cast<Eigen::Index>(2 * k + 1)] = inputs[k].delta;
  }
  return problem.cost(problem.rollout(u), u);
}

std::vector<VehicleState> scripted_tv_states(const ScenarioConfig& config, int samples) {
  std::vector<VehicleState> out{config.tv_initial};
  for (int i = 1; i < samples; ++i) {
    out.push_back(step(out.back(), {0.0, 0.0}, config.smpc.Ts, config.geometry));
  }
  return out;
}

SplineTrajectory scripted_tv_trajectory(const ScenarioConfig& config, int samples) {
  const std::vector<VehicleState> states = scripted_tv_states(config, samples);
  return states_to_control_points(states, config.smpc.Ts);
}

DemonstrationRecord run_closed_loop(const ScenarioConfig& config) {
  const int samples = config.sample_count();
  const double Ts = config.smpc.Ts;

  DemonstrationRecord rec;
  rec.Ts = Ts;
  rec.ev_states.push_back(config.ev_initial);
  rec.tv_states.push_back(config.tv_initial);
  rec.times.push_back(0.0);

  std::vector<ControlInput> warm(static_cast<std::size_t>(config.smpc.horizon));
  for (int i = 1; i < samples; ++i) {
    const VehicleState& ev = rec.ev_states.back();
    const VehicleState& tv = rec.tv_states.back();
    const TvPrediction pred =
        predict_tv(tv, config.smpc.horizon, Ts, config.smpc.sigma0, config.smpc.sigma_growth);
    const OcpSolution sol = solve_ocp(ev, pred, config, &warm);

    const ControlInput applied = sol.inputs.front();
    const VehicleState next_ev = step(ev, applied, Ts, config.geometry);
    const VehicleState next_tv = step(tv, {0.0, 0.0}, Ts, config.geometry);
    if (!std::isfinite(next_ev.x) || !std::isfinite(next_ev.y) || !std::isfinite(next_ev.phi) ||
        !std::isfinite(next_ev.v)) {
      throw std::runtime_error("run_closed_loop: non-finite EV state at sample " + std::to_string(i));
    }
    rec.inputs.push_back(applied);
    rec.statuses.push_back(sol.status);
    rec.ev_states.push_back(next_ev);
    rec.tv_states.push_back(next_tv);
    rec.times.push_back(i * Ts);

    // Shift the solution one step for the next warm start.
    std::copy(sol.inputs.begin() + 1, sol.inputs.end(), warm.begin());
    warm.back() = sol.inputs.back();
  }
  return rec;
}

}  // namespace drivestyle
