#include "drivestyle/learner.hpp"

#include "optim.hpp"

#include <chrono>
#include <cmath>
#include <random>
#include <stdexcept>

namespace drivestyle {

namespace {

/// Combined weight of each unscaled feature in the cost.
FeatureVector effective_weights(const WeightVector& theta, const FeatureModel& model,
                                FeatureSet set) {
  const FeatureVector mask = feature_mask(set);
  FeatureVector w;
  for (std::size_t i = 0; i < kFeatureCount; ++i) {
    w[i] = mask[i] * theta[i] * model.scaling.omega[i];
  }
  return w;
}

std::size_t free_variable_count(const SplineTrajectory& ev) {
  return ControlPoint::kSize * (ev.control_points().size() - 1);
}

Eigen::VectorXd pack(const SplineTrajectory& ev) {
  const auto& points = ev.control_points();
  Eigen::VectorXd x(static_cast<Eigen::Index>(free_variable_count(ev)));
  for (std::size_t j = 1; j < points.size(); ++j) {
    for (std::size_t i = 0; i < ControlPoint::kSize; ++i) {
      x[static_cast<Eigen::Index>(ControlPoint::kSize * (j - 1) + i)] = points[j][i];
    }
  }
  return x;
}

SplineTrajectory unpack(const SplineTrajectory& like, const Eigen::VectorXd& x) {
  std::vector<ControlPoint> points = like.control_points();
  for (std::size_t j = 1; j < points.size(); ++j) {
    for (std::size_t i = 0; i < ControlPoint::kSize; ++i) {
      points[j][i] = x[static_cast<Eigen::Index>(ControlPoint::kSize * (j - 1) + i)];
    }
  }
  return like.with_control_points(std::move(points));
}

bool all_finite(const Eigen::VectorXd& x) { return x.allFinite(); }

TriggerInfo trigger_of(const SplineTrajectory& ev, const FeatureModel& model,
                       const std::optional<TriggerInfo>& frozen) {
  return frozen ? *frozen : model.trigger_for(ev);
}

/// Per-variable scale: 1 for positions, h for velocities, h^2 for
/// accelerations, with h the knot interval ending at the control point. The
/// Hermite basis is well conditioned in these units.
Eigen::VectorXd variable_scale(const SplineTrajectory& ev) {
  Eigen::VectorXd d(static_cast<Eigen::Index>(free_variable_count(ev)));
  const auto& knots = ev.knots();
  for (std::size_t j = 1; j < knots.size(); ++j) {
    const double h = knots[j] - knots[j - 1];
    const std::array<double, 3> powers{1.0, h, h * h};
    for (std::size_t i = 0; i < ControlPoint::kSize; ++i) {
      d[static_cast<Eigen::Index>(ControlPoint::kSize * (j - 1) + i)] = powers[i % 3];
    }
  }
  return d;
}

InnerResult run_inner(const WeightVector& theta, const SplineTrajectory& init,
                      const FeatureModel& model, const LearnerSettings& settings,
                      const std::optional<TriggerInfo>& frozen) {
  const Eigen::VectorXd scale = variable_scale(init);
  const auto fn = [&](const Eigen::VectorXd& z, Eigen::VectorXd& g) -> double {
    if (!all_finite(z)) return std::numeric_limits<double>::quiet_NaN();
    const SplineTrajectory ev = unpack(init, z.cwiseQuotient(scale));
    const double cost =
        trajectory_cost_gradient(theta, ev, model, settings.feature_set, frozen, g);
    g = g.cwiseQuotient(scale);
    return cost;
  };
  optim::Options options;
  options.max_iterations = settings.max_inner;
  options.value_tolerance = settings.inner_tol;
  options.gradient_tolerance = settings.inner_tol;

  const Eigen::VectorXd z0 = pack(init).cwiseProduct(scale);
  optim::Result res = optim::minimize_lbfgs(fn, z0, options);
  InnerResult out;
  // Without an accepted step the start is returned bit-for-bit.
  out.trajectory = (res.x == z0) ? init : unpack(init, res.x.cwiseQuotient(scale));
  out.initial_cost = res.trace.front();
  out.final_cost = res.value;
  out.iterations = res.iterations;
  out.converged = res.converged;
  out.stalled = res.stalled;
  return out;
}

}  // namespace

FeatureVector feature_mask(FeatureSet set) {
  FeatureVector mask = FeatureVector::filled(1.0);
  if (set == FeatureSet::basic) {
    for (std::size_t i = kBasicFeatureCount; i < kFeatureCount; ++i) mask[i] = 0.0;
  }
  return mask;
}

WeightVector initial_weights(const LearnerSettings& settings, const FeatureScaling& scaling) {
  if (settings.theta_init) return *settings.theta_init;
  WeightVector theta;
  for (std::size_t i = 0; i < kFeatureCount; ++i) theta[i] = 1.0 / scaling.omega[i];
  return theta;
}

double trajectory_cost(const WeightVector& theta, const SplineTrajectory& ev,
                       const FeatureModel& model, FeatureSet set,
                       const std::optional<TriggerInfo>& frozen_trigger) {
  const FeatureVector w = effective_weights(theta, model, set);
  const FeatureVector f =
      compute_features(ev, model.tv, model.lane, trigger_of(ev, model, frozen_trigger));
  return dot(w, f);
}

double trajectory_cost_gradient(const WeightVector& theta, const SplineTrajectory& ev,
                                const FeatureModel& model, FeatureSet set,
                                const std::optional<TriggerInfo>& frozen_trigger,
                                Eigen::VectorXd& gradient) {
  const FeatureVector w = effective_weights(theta, model, set);
  const TriggerInfo trig = trigger_of(ev, model, frozen_trigger);
  const FeatureVector f = compute_features(ev, model.tv, model.lane, trig);
  const FeatureJacobian jac = feature_jacobian(ev, model.tv, model.lane, trig);

  Eigen::Matrix<double, static_cast<int>(kFeatureCount), 1> wv;
  for (std::size_t i = 0; i < kFeatureCount; ++i) wv[static_cast<Eigen::Index>(i)] = w[i];
  const auto n = static_cast<Eigen::Index>(free_variable_count(ev));
  gradient = (jac.rightCols(n).transpose() * wv).eval();
  return dot(w, f);
}

InnerResult optimize_trajectory(const WeightVector& theta, const SplineTrajectory& init,
                                const FeatureModel& model, const LearnerSettings& settings,
                                const std::optional<TriggerInfo>& frozen_trigger) {
  for (double t : theta.values) {
    if (!std::isfinite(t)) throw std::invalid_argument("optimize_trajectory: non-finite weight");
  }
  InnerResult best = run_inner(theta, init, model, settings, frozen_trigger);

  if (settings.restarts > 0) {
    std::mt19937_64 rng(settings.seed);
    std::normal_distribution<double> noise(0.0, 0.5);
    for (int r = 0; r < settings.restarts; ++r) {
      std::vector<ControlPoint> points = init.control_points();
      for (std::size_t j = 1; j < points.size(); ++j) {
        for (std::size_t i = 0; i < ControlPoint::kSize; ++i) points[j][i] += noise(rng);
      }
      InnerResult candidate =
          run_inner(theta, init.with_control_points(std::move(points)), model, settings,
                    frozen_trigger);
      if (candidate.final_cost < best.final_cost) {
        candidate.initial_cost = best.initial_cost;
        best = std::move(candidate);
      }
    }
  }
  return best;
}

OuterGradient outer_gradient(const WeightVector& theta, const SplineTrajectory& demo,
                             const FeatureVector& demo_features, const FeatureModel& model,
                             const LearnerSettings& settings) {
  std::optional<TriggerInfo> frozen;
  if (settings.freeze_trigger) frozen = model.trigger_for(demo);

  OuterGradient out;
  out.inner = optimize_trajectory(theta, demo, model, settings, frozen);
  const FeatureVector mask = feature_mask(settings.feature_set);
  // Features of the reproduction are always measured with its own trigger.
  const FeatureVector f = model.scaled(out.inner.trajectory);
  for (std::size_t i = 0; i < kFeatureCount; ++i) {
    out.features[i] = mask[i] * f[i];
    out.gradient[i] = mask[i] * (f[i] - demo_features[i]);
  }
  return out;
}

LearningResult learn(const SplineTrajectory& demo, const FeatureModel& model,
                     const LearnerSettings& settings) {
  if (demo.control_points().size() < 3) {
    throw std::invalid_argument("learn: demonstration needs at least three samples");
  }
  const FeatureVector mask = feature_mask(settings.feature_set);
  LearningResult result;
  const FeatureVector demo_scaled = model.scaled(demo);
  for (std::size_t i = 0; i < kFeatureCount; ++i) result.demo_features[i] = mask[i] * demo_scaled[i];

  WeightVector theta = initial_weights(settings, model.scaling);
  for (std::size_t i = 0; i < kFeatureCount; ++i) theta[i] *= mask[i];
  double alpha = settings.alpha;
  double best_epsilon = std::numeric_limits<double>::infinity();

  for (int i = 1; i <= settings.max_outer; ++i) {
    const auto start = std::chrono::steady_clock::now();
    OuterGradient og = outer_gradient(theta, demo, result.demo_features, model, settings);

    LearningStep step;
    step.iteration = i;
    step.theta = theta;
    step.features = og.features;
    step.epsilon = std::sqrt(dot(og.gradient, og.gradient));
    step.inner_iterations = og.inner.iterations;

    if (step.epsilon < best_epsilon) {
      best_epsilon = step.epsilon;
      result.theta_star = theta;
      result.reproduced = og.inner.trajectory;
      result.best_iteration = i;
    }

    bool done = false;
    if (!result.history.empty()) {
      const double previous = result.history.back().epsilon;
      if (std::abs(step.epsilon - previous) < settings.eps_bar) done = true;
      if (step.epsilon > previous) alpha *= 0.5;
    }
    step.alpha = alpha;
    if (!done) {
      for (std::size_t k = 0; k < kFeatureCount; ++k) {
        theta[k] = mask[k] * std::max(0.0, theta[k] + alpha * og.gradient[k]);
      }
    }
    step.wall_time =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    result.history.push_back(step);
    if (done) {
      result.terminated = true;
      break;
    }
  }
  return result;
}

LearningResult learn(const DemonstrationRecord& demo, const ScenarioConfig& config) {
  const SplineTrajectory ev = states_to_control_points(demo.ev_states, demo.Ts);
  const SplineTrajectory tv = states_to_control_points(demo.tv_states, demo.Ts);
  return learn(ev, make_feature_model(config, tv), config.learner);
}

}  // namespace drivestyle
