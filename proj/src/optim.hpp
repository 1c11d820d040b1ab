#pragma once

// Internal smooth minimizers shared by the OCP solver and the trajectory
// optimizer. Not part of the public API.

#include <Eigen/Core>

#include <functional>
#include <vector>

namespace drivestyle::optim {

/// Returns f(x) and writes the gradient into `grad`.
using Objective = std::function<double(const Eigen::VectorXd& x, Eigen::VectorXd& grad)>;

struct Result {
  Eigen::VectorXd x;
  double value = 0.0;
  int iterations = 0;
  bool converged = false;
  bool stalled = false;             ///< line search found no decrease
  std::vector<double> trace;        ///< accepted objective values, starting with f(x0)
};

struct Options {
  int max_iterations = 200;
  double gradient_tolerance = 1e-6;  ///< relative to max(1, |f|), infinity norm
  double value_tolerance = 0.0;      ///< stop when relative decrease falls below this
  int history = 10;                  ///< L-BFGS memory
};

/// Dense BFGS with projection onto the box [lower, upper] and Armijo
/// backtracking along the projection arc. Every accepted step decreases f.
Result minimize_box(const Objective& fn, Eigen::VectorXd x0, const Eigen::VectorXd& lower,
                    const Eigen::VectorXd& upper, const Options& options);

/// Limited-memory BFGS with Armijo backtracking. Non-finite trial values are
/// treated as insufficient decrease and the step is shortened.
Result minimize_lbfgs(const Objective& fn, Eigen::VectorXd x0, const Options& options);

}  // namespace drivestyle::optim
