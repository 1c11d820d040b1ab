#include "optim.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <deque>

namespace drivestyle::optim {

namespace {

constexpr double kArmijo = 1e-4;
constexpr int kMaxBacktracks = 50;

bool converged_gradient(const Eigen::VectorXd& pg, double f, const Options& options) {
  return pg.lpNorm<Eigen::Infinity>() <= options.gradient_tolerance * std::max(1.0, std::abs(f));
}

}  // namespace

Result minimize_box(const Objective& fn, Eigen::VectorXd x0, const Eigen::VectorXd& lower,
                    const Eigen::VectorXd& upper, const Options& options) {
  const Eigen::Index n = x0.size();
  auto project = [&](const Eigen::VectorXd& v) { return v.cwiseMax(lower).cwiseMin(upper); };

  Result r;
  r.x = project(x0);
  Eigen::VectorXd g(n);
  r.value = fn(r.x, g);
  r.trace.push_back(r.value);

  Eigen::MatrixXd H = Eigen::MatrixXd::Identity(n, n);
  bool fresh = true;
  Eigen::VectorXd g_new(n);

  for (r.iterations = 0; r.iterations < options.max_iterations; ++r.iterations) {
    const Eigen::VectorXd pg = project(r.x - g) - r.x;
    if (converged_gradient(pg, r.value, options)) {
      r.converged = true;
      break;
    }

    // Variables held at a bound with the gradient pushing outward stay fixed.
    Eigen::VectorXd free_mask(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      const bool at_lower = r.x[i] <= lower[i] && g[i] > 0.0;
      const bool at_upper = r.x[i] >= upper[i] && g[i] < 0.0;
      free_mask[i] = (at_lower || at_upper) ? 0.0 : 1.0;
    }
    const Eigen::VectorXd g_free = g.cwiseProduct(free_mask);
    Eigen::VectorXd d = -(H * g_free).cwiseProduct(free_mask);
    if (g.dot(d) >= 0.0) {
      H.setIdentity();
      fresh = true;
      d = -g_free;
    }

    bool accepted = false;
    Eigen::VectorXd x_new;
    double f_new = 0.0;
    double alpha = 1.0;
    for (int k = 0; k < kMaxBacktracks; ++k, alpha *= 0.5) {
      x_new = project(r.x + alpha * d);
      f_new = fn(x_new, g_new);
      if (std::isfinite(f_new) && f_new <= r.value + kArmijo * g.dot(x_new - r.x) &&
          f_new <= r.value) {
        accepted = true;
        break;
      }
    }
    if (!accepted) {
      if (!fresh) {
        H.setIdentity();
        fresh = true;
        continue;
      }
      r.stalled = true;
      break;
    }

    const Eigen::VectorXd s = x_new - r.x;
    const Eigen::VectorXd y = g_new - g;
    const double sy = s.dot(y);
    const double prev = r.value;
    r.x = x_new;
    r.value = f_new;
    g = g_new;
    r.trace.push_back(r.value);

    if (sy > 1e-12 * s.norm() * y.norm()) {
      if (fresh) {
        H *= sy / y.squaredNorm();
        fresh = false;
      }
      const double rho = 1.0 / sy;
      const Eigen::MatrixXd V = Eigen::MatrixXd::Identity(n, n) - rho * s * y.transpose();
      H = V * H * V.transpose() + rho * s * s.transpose();
    }
    if (options.value_tolerance > 0.0 &&
        prev - r.value <= options.value_tolerance * std::max(1.0, std::abs(prev))) {
      r.converged = true;
      ++r.iterations;
      break;
    }
  }
  return r;
}

Result minimize_lbfgs(const Objective& fn, Eigen::VectorXd x0, const Options& options) {
  const Eigen::Index n = x0.size();
  Result r;
  r.x = std::move(x0);
  Eigen::VectorXd g(n);
  r.value = fn(r.x, g);
  r.trace.push_back(r.value);
  if (!std::isfinite(r.value)) {
    r.stalled = true;
    return r;
  }

  std::deque<Eigen::VectorXd> s_hist;
  std::deque<Eigen::VectorXd> y_hist;
  std::deque<double> rho_hist;
  Eigen::VectorXd g_new(n);

  for (r.iterations = 0; r.iterations < options.max_iterations; ++r.iterations) {
    if (converged_gradient(g, r.value, options)) {
      r.converged = true;
      break;
    }

    // Two-loop recursion.
    Eigen::VectorXd q = g;
    std::vector<double> a(s_hist.size());
    for (std::size_t i = s_hist.size(); i-- > 0;) {
      a[i] = rho_hist[i] * s_hist[i].dot(q);
      q -= a[i] * y_hist[i];
    }
    if (!s_hist.empty()) {
      q *= s_hist.back().dot(y_hist.back()) / y_hist.back().squaredNorm();
    } else {
      q /= std::max(1.0, g.lpNorm<Eigen::Infinity>());
    }
    for (std::size_t i = 0; i < s_hist.size(); ++i) {
      const double b = rho_hist[i] * y_hist[i].dot(q);
      q += (a[i] - b) * s_hist[i];
    }
    // A steepest-descent step carries no curvature information, so its
    // decrease says little about convergence.
    bool quasi_newton = !s_hist.empty();
    Eigen::VectorXd d = -q;
    double slope = g.dot(d);
    if (!(slope < 0.0)) {
      s_hist.clear();
      y_hist.clear();
      rho_hist.clear();
      d = -g / std::max(1.0, g.lpNorm<Eigen::Infinity>());
      slope = g.dot(d);
      quasi_newton = false;
    }

    bool accepted = false;
    Eigen::VectorXd x_new;
    double f_new = 0.0;
    double alpha = 1.0;
    for (int k = 0; k < kMaxBacktracks; ++k, alpha *= 0.5) {
      x_new = r.x + alpha * d;
      f_new = fn(x_new, g_new);
      if (std::isfinite(f_new) && f_new <= r.value + kArmijo * alpha * slope) {
        accepted = true;
        break;
      }
    }
    if (!accepted) {
      if (!s_hist.empty()) {
        s_hist.clear();
        y_hist.clear();
        rho_hist.clear();
        continue;
      }
      r.stalled = true;
      break;
    }

    Eigen::VectorXd s = x_new - r.x;
    Eigen::VectorXd y = g_new - g;
    const double sy = s.dot(y);
    const double prev = r.value;
    r.x = std::move(x_new);
    r.value = f_new;
    g = g_new;
    r.trace.push_back(r.value);

    if (sy > 1e-12 * s.norm() * y.norm()) {
      s_hist.push_back(std::move(s));
      y_hist.push_back(std::move(y));
      rho_hist.push_back(1.0 / sy);
      if (static_cast<int>(s_hist.size()) > options.history) {
        s_hist.pop_front();
        y_hist.pop_front();
        rho_hist.pop_front();
      }
    }
    if (quasi_newton && options.value_tolerance > 0.0 &&
        prev - r.value <= options.value_tolerance * std::max(1.0, std::abs(prev))) {
      r.converged = true;
      ++r.iterations;
      break;
    }
  }
  return r;
}

}  // namespace drivestyle::optim
