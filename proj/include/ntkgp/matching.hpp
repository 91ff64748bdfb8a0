#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <ntkgp/gp.hpp>
#include <ntkgp/kernels.hpp>

// The three kernel-equivalence procedures: per-pair length-scale inversion,
// variance-minimizing grid search over the NTK bias, and posterior-mean
// matching of a Matérn GP against a fitted NTK GP.
namespace ntkgp {

struct MatchReport {
  int depth = 0;
  double beta = 0.0;           ///< matched bias
  double length_scale = 0.0;   ///< matched ell (ell-bar for the grid search)
  double variance = 0.0;       ///< var[L] at the optimum (grid search only)
  std::vector<double> d_theta_samples;  ///< spot-check gaps at the optimum
  double rmse = 0.0;           ///< posterior matching only
  double pearson_rho = 0.0;    ///< posterior matching only
  bool flagged = false;        ///< bound cap or precision warning
  std::string note;
};

/// One cell of the bias grid search, for curve export.
struct BetaGridPoint {
  double beta = 0.0;
  double ell_mean = 0.0;
  double ell_var = 0.0;
};

/// Inverts the Laplace kernel through one normalized-NTK value:
/// ell = |x - z| / (-log kddot). Throws std::domain_error when kddot >= 1
/// (degenerate, e.g. x = z) or kddot <= 0.
[[nodiscard]] double length_scale_from_pair(const VectorRef& x, const VectorRef& z,
                                            int depth, double beta);

/// Pointwise kernel gap |kddot_ntk(x,z;depth,beta) - exp(-|x-z|/ell)|.
[[nodiscard]] double d_theta(const VectorRef& x, const VectorRef& z, int depth,
                             double beta, double ell);

/// Per-depth default for the top of the beta grid: optima shrink with depth.
[[nodiscard]] double default_beta_max(int depth);

enum class SphereSampler {
  kPositiveUniform,  ///< uniform [0,1)^dim entries, L2-normalized (default;
                     ///< the reference optima assume this sampler)
  kGaussian,         ///< standard-normal entries, L2-normalized (uniform on
                     ///< the full sphere)
};

struct Algorithm1Options {
  int dim = 100;            ///< ambient dimension of the sphere pairs
  int grid_size = 201;      ///< total beta cells including beta = 0
  double beta_max = 0.0;    ///< <= 0 means default_beta_max(depth)
  SphereSampler sampler = SphereSampler::kPositiveUniform;
  std::uint64_t seed = 0;
};

/// Grid search over beta minimizing var[L] of the n per-pair length scales.
/// The same seed (hence the same n pairs) is reused for every beta cell, so
/// cells differ only in beta and can be evaluated independently in parallel.
/// The grid is beta = 0 plus grid_size-1 log-spaced values on
/// [beta_max*1e-3, beta_max]. If curve is non-null it receives one entry per
/// cell in grid order.
MatchReport match_bias_lengthscale(int depth, int n,
                                   const Algorithm1Options& options = {},
                                   std::vector<BetaGridPoint>* curve = nullptr);

/// Objective of the posterior matching stage: condition a Matérn GP with all
/// hyperparameters frozen (ell as given, c and sigma^2 inherited), predict on
/// x_test, and return the Euclidean gap ||target - prediction||.
[[nodiscard]] double posterior_match_objective(
    KernelFamily matern_family, double ell, double constant, double noise,
    bool noise_on, const Matrix& x, const Vector& y, const Matrix& x_test,
    const Vector& target, const FitOptions& options);

/// Full matching stage: takes an already-fitted NTK model, freezes its c and
/// sigma^2 into the Matérn kernel, and minimizes the objective over ell on
/// [1e-3, 10] — a log-spaced scan brackets the best basin (the gap need not
/// be unimodal), a bounded 1-D polish refines it, and the upper bound grows
/// x10 (capped at 1e5) whenever the optimum lands within 1% of it. Reports
/// the matched ell, RMSE = objective/sqrt(m), and the Pearson correlation of
/// the two posterior means; sets `flagged` if the cap is reached still at
/// the boundary.
MatchReport posterior_match(const GpModel& ntk_model, KernelFamily matern_family,
                            const Matrix& x_test, const FitOptions& options);

}  // namespace ntkgp
