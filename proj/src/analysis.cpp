#include "drivestyle/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace drivestyle {

namespace {

constexpr int kSamplesPerSegment = 20;

std::vector<double> dense_times(const SplineTrajectory& traj) {
  std::vector<double> out;
  const auto& knots = traj.knots();
  for (std::size_t j = 0; j + 1 < knots.size(); ++j) {
    const double h = knots[j + 1] - knots[j];
    for (int k = 0; k < kSamplesPerSegment; ++k) out.push_back(knots[j] + h * k / kSamplesPerSegment);
  }
  out.push_back(knots.back());
  return out;
}

double nan() { return std::numeric_limits<double>::quiet_NaN(); }

}  // namespace

std::optional<double> lateral_at_x(const SplineTrajectory& traj, double x) {
  const std::vector<double> times = dense_times(traj);
  double t_prev = times.front();
  double x_prev = traj.evaluate(t_prev).x;
  if (x_prev == x) return traj.evaluate(t_prev).y;
  for (std::size_t i = 1; i < times.size(); ++i) {
    const double t_cur = times[i];
    const double x_cur = traj.evaluate(t_cur).x;
    if (x_cur == x) return traj.evaluate(t_cur).y;
    if ((x_prev - x) * (x_cur - x) <= 0.0) {
      double lo = t_prev;
      double hi = t_cur;
      const bool increasing = x_cur >= x_prev;
      for (int k = 0; k < 100 && hi - lo > 1e-15; ++k) {
        const double mid = 0.5 * (lo + hi);
        const double xm = traj.evaluate(mid).x;
        if ((xm < x) == increasing) {
          lo = mid;
        } else {
          hi = mid;
        }
      }
      return traj.evaluate(0.5 * (lo + hi)).y;
    }
    t_prev = t_cur;
    x_prev = x_cur;
  }
  return std::nullopt;
}

ComparisonMetrics compare_trajectories(const SplineTrajectory& a, const SplineTrajectory& b,
                                       const std::optional<XWindow>& window,
                                       const FeatureModel* model) {
  if (window && !(window->max >= window->min)) {
    throw std::invalid_argument("compare: window max below window min");
  }
  ComparisonMetrics m;
  double sum_sq = 0.0;
  for (double t : dense_times(a)) {
    const Vec2 p = a.evaluate(t);
    if (window && (p.x < window->min || p.x > window->max)) continue;
    const auto yb = lateral_at_x(b, p.x);
    if (!yb) continue;
    const double gap = std::abs(p.y - *yb);
    m.max_gap = std::max(m.max_gap, gap);
    sum_sq += gap * gap;
    ++m.samples;
  }
  if (m.samples == 0) {
    throw std::invalid_argument("compare: trajectories share no longitudinal positions" +
                                std::string(window ? " inside the window" : ""));
  }
  m.rmse = std::sqrt(sum_sq / static_cast<double>(m.samples));
  m.feature_l2 = model ? distance(model->scaled(a), model->scaled(b)) : nan();
  return m;
}

LateralRms lateral_rms(const SplineTrajectory& reference, const SplineTrajectory& other) {
  double sv = 0.0;
  double sa = 0.0;
  const auto& knots = reference.knots();
  for (double t : knots) {
    const double vy = reference.evaluate(t, 1).y - other.evaluate(t, 1).y;
    const double ay = reference.evaluate(t, 2).y - other.evaluate(t, 2).y;
    sv += vy * vy;
    sa += ay * ay;
  }
  const double n = static_cast<double>(knots.size());
  return {std::sqrt(sv / n), std::sqrt(sa / n)};
}

LateralRms lateral_rms_dense(const SplineTrajectory& reference, const SplineTrajectory& other,
                             int points) {
  const double t0 = std::max(reference.start_time(), other.start_time());
  const double t1 = std::min(reference.end_time(), other.end_time());
  if (!(t1 > t0) || points < 2) throw std::invalid_argument("lateral_rms: no common time span");
  double sv = 0.0;
  double sa = 0.0;
  for (int i = 0; i < points; ++i) {
    const double t = t0 + (t1 - t0) * i / (points - 1);
    const double vy = reference.evaluate(t, 1).y - other.evaluate(t, 1).y;
    const double ay = reference.evaluate(t, 2).y - other.evaluate(t, 2).y;
    sv += vy * vy;
    sa += ay * ay;
  }
  return {std::sqrt(sv / points), std::sqrt(sa / points)};
}

CsvTable xy_series(const std::vector<NamedTrajectory>& trajectories) {
  if (trajectories.empty()) throw std::invalid_argument("xy series: no trajectories");
  CsvTable table;
  table.header.push_back("x");
  for (const auto& [name, traj] : trajectories) table.header.push_back("y_" + name);
  for (const ControlPoint& c : trajectories.front().second.control_points()) {
    std::vector<double> row{c.rx, c.ry};
    for (std::size_t i = 1; i < trajectories.size(); ++i) {
      row.push_back(lateral_at_x(trajectories[i].second, c.rx).value_or(nan()));
    }
    table.rows.push_back(std::move(row));
  }
  return table;
}

CsvTable se_series(const SplineTrajectory& ev, const SplineTrajectory& tv, double l_a, double l_b) {
  CsvTable table;
  table.header = {"t", "x", "s_e"};
  for (double t : ev.knots()) {
    const Vec2 e = ev.evaluate(t);
    const Vec2 o = tv.evaluate(t);
    table.rows.push_back({t, e.x, elliptical_index(e.x - o.x, e.y - o.y, l_a, l_b)});
  }
  return table;
}

CsvTable kinematics_series(const std::vector<NamedTrajectory>& trajectories) {
  if (trajectories.empty()) throw std::invalid_argument("kinematics series: no trajectories");
  CsvTable table;
  table.header.push_back("t");
  for (const auto& [name, traj] : trajectories) {
    for (const char* q : {"vx_", "vy_", "ax_", "ay_"}) table.header.push_back(q + name);
  }
  for (double t : trajectories.front().second.knots()) {
    std::vector<double> row{t};
    for (const auto& [name, traj] : trajectories) {
      const bool inside = t >= traj.start_time() && t <= traj.end_time();
      const Vec2 v = inside ? traj.evaluate(t, 1) : Vec2{nan(), nan()};
      const Vec2 acc = inside ? traj.evaluate(t, 2) : Vec2{nan(), nan()};
      row.insert(row.end(), {v.x, v.y, acc.x, acc.y});
    }
    table.rows.push_back(std::move(row));
  }
  return table;
}

CsvTable epsilon_series(const std::vector<LearningStep>& history) {
  CsvTable table;
  table.header = {"iteration", "epsilon"};
  for (const auto& step : history) table.rows.push_back({static_cast<double>(step.iteration), step.epsilon});
  return table;
}

}  // namespace drivestyle
