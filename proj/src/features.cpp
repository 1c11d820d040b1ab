#include "drivestyle/features.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <stdexcept>

namespace drivestyle {

namespace {

constexpr std::array<double, 5> kGaussNodes = {-0.9061798459386640, -0.5384693101056831, 0.0,
                                               0.5384693101056831, 0.9061798459386640};
constexpr std::array<double, 5> kGaussWeights = {0.2369268850561891, 0.4786286704993665,
                                                 0.5688888888888889, 0.4786286704993665,
                                                 0.2369268850561891};
constexpr int kTrapezoidSteps = 50;

double sign(double v) { return static_cast<double>((v > 0.0) - (v < 0.0)); }

enum Axis : std::size_t { kAxisX = 0, kAxisY = 1 };

/// Scatters derivatives of spline values into the feature Jacobian. The
/// quintic of a segment is linear in its six boundary values per axis, so the
/// derivative of a value w.r.t. boundary value m is the m-th Hermite basis
/// polynomial evaluated at the same point.
class JacobianAccumulator {
 public:
  JacobianAccumulator(const SplineTrajectory& ev, FeatureJacobian& jac) : ev_(ev), jac_(jac) {
    jac_.setZero(kFeatureCount, static_cast<Eigen::Index>(6 * ev.control_points().size()));
  }

  void add(Feature f, std::size_t segment, double s, int order, Axis axis, double factor) {
    if (factor == 0.0) return;
    load(segment);
    const auto row = static_cast<Eigen::Index>(index(f));
    for (std::size_t m = 0; m < 6; ++m) {
      const std::size_t point = segment + m / 3;
      const std::size_t component = 3 * axis + m % 3;
      jac_(row, static_cast<Eigen::Index>(6 * point + component)) +=
          factor * eval_quintic(unit_[m], s, order);
    }
  }

 private:
  void load(std::size_t segment) {
    const auto& knots = ev_.knots();
    const double h = knots[segment + 1] - knots[segment];
    if (h == cached_h_) return;
    cached_h_ = h;
    for (std::size_t m = 0; m < 6; ++m) {
      std::array<double, 6> e{};
      e[m] = 1.0;
      unit_[m] = fit_quintic(e[0], e[1], e[2], e[3], e[4], e[5], h);
    }
  }

  const SplineTrajectory& ev_;
  FeatureJacobian& jac_;
  double cached_h_ = -1.0;
  std::array<Quintic, 6> unit_{};
};

/// Integral of |g| over [a, b] intersected with each segment, on 50 uniform
/// sub-steps per segment. Each sub-step integrates |.| of the linear
/// interpolant exactly, so a sign change inside a sub-step costs no more
/// accuracy than a smooth stretch. `grad(j, s, w)` receives the derivative of
/// the result w.r.t. the node value g(j, s).
template <typename G, typename Grad>
double integrate_abs(const SplineTrajectory& ev, double a, double b, G&& g, Grad&& grad) {
  const auto& knots = ev.knots();
  a = std::max(a, ev.start_time());
  b = std::min(b, ev.end_time());
  double total = 0.0;
  if (!(b > a)) return total;
  std::array<double, kTrapezoidSteps + 1> s{}, v{}, d{};
  for (std::size_t j = 0; j < ev.segment_count(); ++j) {
    const double lo = std::max(a, knots[j]);
    const double hi = std::min(b, knots[j + 1]);
    if (!(hi > lo)) continue;
    const double step = (hi - lo) / kTrapezoidSteps;
    for (int k = 0; k <= kTrapezoidSteps; ++k) {
      s[k] = (lo - knots[j]) + k * step;
      v[k] = g(j, s[k]);
      d[k] = 0.0;
    }
    for (int k = 0; k < kTrapezoidSteps; ++k) {
      const double g0 = v[k];
      const double g1 = v[k + 1];
      if (g0 * g1 >= 0.0) {
        total += 0.5 * step * (std::abs(g0) + std::abs(g1));
        d[k] += 0.5 * step * sign(g0);
        d[k + 1] += 0.5 * step * sign(g1);
      } else {
        const double p = std::abs(g0);
        const double q = std::abs(g1);
        const double sum = p + q;
        total += step * (p * p + q * q) / (2.0 * sum);
        d[k] += sign(g0) * step * (p * p + 2.0 * p * q - q * q) / (2.0 * sum * sum);
        d[k + 1] += sign(g1) * step * (q * q + 2.0 * p * q - p * p) / (2.0 * sum * sum);
      }
    }
    for (int k = 0; k <= kTrapezoidSteps; ++k) grad(j, s[k], d[k]);
  }
  return total;
}

template <typename Fn>
void for_each_gauss_node(const SplineTrajectory& ev, Fn&& fn) {
  const auto& knots = ev.knots();
  for (std::size_t j = 0; j < ev.segment_count(); ++j) {
    const double half = 0.5 * (knots[j + 1] - knots[j]);
    for (std::size_t n = 0; n < kGaussNodes.size(); ++n) {
      fn(j, half * (1.0 + kGaussNodes[n]), half * kGaussWeights[n]);
    }
  }
}

/// Segment and local time of a point evaluation at t.
struct Location {
  std::size_t segment;
  double s;
};

Location locate(const SplineTrajectory& ev, double t) {
  const std::size_t j = ev.segment_index(t);
  return {j, t - ev.knots()[j]};
}

FeatureVector evaluate(const SplineTrajectory& ev, const SplineTrajectory& tv,
                       const LaneContext& lane, const TriggerInfo& trigger,
                       FeatureDiagnostics* diagnostics, FeatureJacobian* jacobian) {
  if (tv.start_time() > ev.start_time() || tv.end_time() < ev.end_time()) {
    throw std::invalid_argument("compute_features: TV trajectory does not cover the EV domain");
  }
  std::optional<JacobianAccumulator> acc;
  if (jacobian != nullptr) acc.emplace(ev, *jacobian);

  FeatureVector f;
  FeatureDiagnostics diag;
  const auto& knots = ev.knots();

  for_each_gauss_node(ev, [&](std::size_t j, double s, double w) {
    const Vec2 vel = ev.evaluate_local(j, s, 1);
    const Vec2 accel = ev.evaluate_local(j, s, 2);
    const double x_ev = ev.evaluate_local(j, s, 0).x;
    const double x_tv = tv.evaluate(knots[j] + s, 0).x;

    f[Feature::accel_x] += w * accel.x * accel.x;
    f[Feature::accel_y] += w * accel.y * accel.y;
    const double dv = lane.v_des - vel.x;
    f[Feature::speed] += w * dv * dv;

    const double gap = x_tv - x_ev;
    const double abs_gap = std::abs(gap);
    const bool clamped = abs_gap < kMinLongitudinalGap;
    diag.gap_clamped = diag.gap_clamped || clamped;
    f[Feature::inverse_tiv] += w * lane.v_lane / (clamped ? kMinLongitudinalGap : abs_gap);

    if (acc) {
      acc->add(Feature::accel_x, j, s, 2, kAxisX, 2.0 * w * accel.x);
      acc->add(Feature::accel_y, j, s, 2, kAxisY, 2.0 * w * accel.y);
      acc->add(Feature::speed, j, s, 1, kAxisX, -2.0 * w * dv);
      if (!clamped) {
        acc->add(Feature::inverse_tiv, j, s, 0, kAxisX, w * lane.v_lane * sign(gap) / (gap * gap));
      }
    }
  });

  auto lateral = [&](std::size_t j, double s) { return ev.evaluate_local(j, s, 0).y; };
  // Targets minus position: the position derivative carries a minus sign.
  auto lane_gradient = [&](Feature feature) {
    return [&acc, feature](std::size_t j, double s, double w) {
      if (acc) acc->add(feature, j, s, 0, kAxisY, -w);
    };
  };

  f[Feature::desired_lane] = integrate_abs(
      ev, ev.start_time(), ev.end_time(),
      [&](std::size_t j, double s) { return lane.l_des - lateral(j, s); },
      lane_gradient(Feature::desired_lane));

  diag.t_turn = turn_time(ev, lane);
  f[Feature::initial_lane] = integrate_abs(
      ev, ev.start_time(), diag.t_turn,
      [&](std::size_t j, double s) { return lane.l_initial - lateral(j, s); },
      lane_gradient(Feature::initial_lane));

  f[Feature::end_lane] = integrate_abs(
      ev, ev.end_time() - lane.end_window, ev.end_time(),
      [&](std::size_t j, double s) { return lane.l_target - lateral(j, s); },
      lane_gradient(Feature::end_lane));

  if (trigger.triggered) {
    const Location start = locate(ev, trigger.t_trg);
    const Location end = locate(ev, trigger.window_end);
    const double y_start = ev.evaluate_local(start.segment, start.s, 0).y;
    const double y_end = ev.evaluate_local(end.segment, end.s, 0).y;

    const double dy_start = y_start - tv.evaluate(trigger.t_trg, 0).y;
    const double dy_end = y_end - tv.evaluate(trigger.window_end, 0).y;
    f[Feature::start_distance] = std::exp(-std::abs(dy_start));
    f[Feature::end_distance] = std::exp(-std::abs(dy_end));
    if (acc) {
      acc->add(Feature::start_distance, start.segment, start.s, 0, kAxisY,
               -f[Feature::start_distance] * sign(dy_start));
      acc->add(Feature::end_distance, end.segment, end.s, 0, kAxisY,
               -f[Feature::end_distance] * sign(dy_end));
    }

    double weight_sum = 0.0;
    f[Feature::integral_distance] = integrate_abs(
        ev, trigger.t_trg, trigger.window_end,
        [&](std::size_t j, double s) { return lateral(j, s) - y_start; },
        [&](std::size_t j, double s, double w) {
          if (acc) acc->add(Feature::integral_distance, j, s, 0, kAxisY, w);
          weight_sum += w;
        });
    if (acc) {
      acc->add(Feature::integral_distance, start.segment, start.s, 0, kAxisY, -weight_sum);
    }
  }

  if (diagnostics != nullptr) *diagnostics = diag;
  return f;
}

}  // namespace

double elliptical_index(double dx, double dy, double l_a, double l_b) {
  return dx * dx / (l_a * l_a) + dy * dy / (l_b * l_b);
}

TriggerInfo detect_trigger(const SplineTrajectory& ev, const SplineTrajectory& tv, double l_a,
                           double l_b, const TriggerSettings& settings) {
  for (std::size_t j = 0; j < ev.knots().size(); ++j) {
    const double t = ev.knots()[j];
    const ControlPoint& c = ev.control_points()[j];
    const Vec2 tv_pos = tv.evaluate(t, 0);
    if (elliptical_index(c.rx - tv_pos.x, c.ry - tv_pos.y, l_a, l_b) < settings.lambda) {
      return {true, t, std::min(t + settings.reaction_time, ev.end_time())};
    }
  }
  return {};
}

double turn_time(const SplineTrajectory& ev, const LaneContext& lane) {
  for (std::size_t j = 0; j < ev.knots().size(); ++j) {
    if (std::abs(ev.control_points()[j].ry - lane.l_initial) > 0.25 * lane.lane_width) {
      return ev.knots()[j];
    }
  }
  return ev.end_time();
}

FeatureVector compute_features(const SplineTrajectory& ev, const SplineTrajectory& tv,
                               const LaneContext& lane, const TriggerInfo& trigger,
                               FeatureDiagnostics* diagnostics) {
  return evaluate(ev, tv, lane, trigger, diagnostics, nullptr);
}

FeatureJacobian feature_jacobian(const SplineTrajectory& ev, const SplineTrajectory& tv,
                                 const LaneContext& lane, const TriggerInfo& trigger) {
  FeatureJacobian jac;
  evaluate(ev, tv, lane, trigger, nullptr, &jac);
  return jac;
}

FeatureVector scale(const FeatureVector& fv, const FeatureScaling& scaling) {
  FeatureVector out;
  for (std::size_t i = 0; i < kFeatureCount; ++i) out[i] = scaling.omega[i] * fv[i];
  return out;
}

double dot(const FeatureVector& a, const FeatureVector& b) {
  double sum = 0.0;
  for (std::size_t i = 0; i < kFeatureCount; ++i) sum += a[i] * b[i];
  return sum;
}

double distance(const FeatureVector& a, const FeatureVector& b) {
  double sum = 0.0;
  for (std::size_t i = 0; i < kFeatureCount; ++i) sum += (a[i] - b[i]) * (a[i] - b[i]);
  return std::sqrt(sum);
}

TriggerInfo FeatureModel::trigger_for(const SplineTrajectory& ev) const {
  return detect_trigger(ev, tv, l_a, l_b, trigger);
}

FeatureVector FeatureModel::scaled(const SplineTrajectory& ev) const {
  return scaled(ev, trigger_for(ev));
}

FeatureVector FeatureModel::scaled(const SplineTrajectory& ev, const TriggerInfo& trig,
                                   FeatureDiagnostics* diagnostics) const {
  return scale(compute_features(ev, tv, lane, trig, diagnostics), scaling);
}

FeatureModel make_feature_model(const ScenarioConfig& config, SplineTrajectory tv) {
  FeatureModel model;
  model.tv = std::move(tv);
  model.lane = config.lane;
  model.scaling = config.learner.scaling;
  model.l_a = config.smpc.ellipse.l_a;
  model.l_b = config.smpc.ellipse.l_b;
  model.trigger = config.learner.trigger;
  return model;
}

}  // namespace drivestyle
