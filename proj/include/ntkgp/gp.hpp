#pragma once

#include <cstdint>
#include <limits>

#include <ntkgp/kernels.hpp>

// Exact Gaussian-process regression: marginal likelihood with gradients,
// multi-restart bounded hyperparameter optimization, posterior prediction,
// and prior/posterior sampling. Hyperparameters are optimized in log space
// within the bounds carried by the KernelSpec.
namespace ntkgp {

struct FitOptions {
  int n_restart = 9;        ///< random restarts beyond the supplied start
  bool y_rescale = true;    ///< fit on (y - mean) / sd, undone at prediction
  double alpha = 1e-5;      ///< jitter added to the training Gram diagonal
  std::uint64_t seed = 0;   ///< restart r draws from Rng(mix_seed(seed, r))
  int max_iter = 200;
  double grad_tol = 1e-8;
};

struct GpModel {
  Matrix x_train;           ///< n x d (n = 0 for a pure prior model)
  Vector y_train;           ///< original units
  KernelSpec kernel;        ///< hyperparameters after optimization
  Matrix chol_lower;        ///< L with L L^T = K + sigma^2 I + alpha I
  Vector dual;              ///< (K + sigma^2 I + alpha I)^{-1} y_scaled
  double y_mean = 0.0;
  double y_scale = 1.0;
  double mll = -std::numeric_limits<double>::infinity();
  double alpha = 1e-5;
};

struct MllResult {
  double value = 0.0;
  Vector grad;  ///< over free hyperparameters, in log space, free_hypers order
};

/// -1/2 y^T K~^{-1} y - 1/2 log|K~| - n/2 log(2 pi) with
/// K~ = K + sigma^2 I + alpha I, plus its gradient in log-hyperparameter
/// space. Throws ConditioningError when K~ is not numerically PD.
MllResult log_marginal_likelihood(const Matrix& x, const Vector& y,
                                  const KernelSpec& kernel, double alpha = 1e-5);

/// Maximizes the MLL from the supplied hyperparameters plus n_restart
/// log-uniform restarts within bounds; returns the best model. With no free
/// hyperparameters this is a single factorization.
GpModel fit(const Matrix& x, const Vector& y, const KernelSpec& kernel,
            const FitOptions& options = {});

/// A model with no training data: predictions revert to the prior.
GpModel prior_model(const KernelSpec& kernel, double alpha = 1e-5);

/// Posterior mean at new inputs, in original response units.
Vector predict_mean(const GpModel& model, const Matrix& x_test);

/// Posterior covariance of the latent function (training noise excluded on
/// the test prior), scaled back to original units.
Matrix predict_cov(const GpModel& model, const Matrix& x_test);

/// Draws count paths from the posterior (or prior, for a prior model) at
/// x_test; row per draw. Covariance is jittered by model.alpha before
/// factorization. Deterministic under seed.
Matrix sample(const GpModel& model, const Matrix& x_test, int count,
              std::uint64_t seed);

}  // namespace ntkgp
