#pragma once

#include <functional>

#include <ntkgp/kernels.hpp>

// Local minimizers used for hyperparameter search: a derivative-free 1-D
// golden-section/parabolic hybrid (length-scale matching) and a bounded
// limited-memory quasi-Newton method (marginal-likelihood ascent in
// log-hyperparameter space).
namespace ntkgp {

struct ScalarMinResult {
  double x = 0.0;
  double fx = 0.0;
  int evals = 0;
  bool converged = false;  ///< bracket shrank below xtol within max_evals
};

/// Minimizes f on [lo, hi] to absolute tolerance xtol on x.
ScalarMinResult minimize_scalar(const std::function<double(double)>& f,
                                double lo, double hi, double xtol = 1e-6,
                                int max_evals = 500);

/// Objective with gradient: returns f(x) and writes df/dx into grad (same
/// size as x). May signal an infeasible point by returning +infinity or a
/// huge value with a zero gradient; the line search backs away from it.
using ObjectiveWithGrad = std::function<double(const Vector&, Vector&)>;

struct BoxMinOptions {
  int max_iter = 200;
  double grad_tol = 1e-8;  ///< on the projected gradient's infinity norm
  int memory = 8;          ///< stored curvature pairs
};

struct BoxMinResult {
  Vector x;
  double fx = 0.0;
  double grad_norm = 0.0;  ///< projected-gradient infinity norm at x
  int iters = 0;
  bool converged = false;
};

/// Minimizes fg over the box [lo, hi] (element-wise) starting from x0
/// (clamped into the box). L-BFGS directions with an Armijo backtracking
/// line search along the projected path.
BoxMinResult minimize_box(const ObjectiveWithGrad& fg, Vector x0,
                          const Vector& lo, const Vector& hi,
                          const BoxMinOptions& options = {});

}  // namespace ntkgp
