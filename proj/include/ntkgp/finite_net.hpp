#pragma once

#include <cstdint>
#include <vector>

#include <ntkgp/kernels.hpp>

// Monte-Carlo estimator of the NTK of a finite-width ReLU network at
// initialization. It exists to validate the analytic recursion in kernels.hpp:
// as width grows the estimate converges to ntk_eval (the unnormalized kernel).
//
// Network, matching the infinite-width parameterization the recursion models:
//   a^0 = x
//   g^1 = W^1 a^0 + beta b^1                      W^1 in R^{H x d}, scale 1
//   g^h = sqrt(2/H) W^h a^{h-1} + beta b^h        W^h in R^{H x H}, h = 2..depth
//   f   = sqrt(2/H) w^T a^depth + beta c          (depth = 0: f = w^T x + beta c)
// with a^h = max(g^h, 0), all weights i.i.d. standard normal, and biases zero
// at initialization (beta enters only as the bias gradient multiplier, which
// leaves the limit kernel identical to the recursion's beta^2 terms).
//
// The kernel of one replicate is the exact parameter-gradient inner product
//   sum_params  df(x)/dp * df(z)/dp,
// computed layer by layer from activation and pre-activation-gradient inner
// products rather than by materializing per-parameter gradients.
namespace ntkgp {

struct FiniteNetConfig {
  int depth = 2;            ///< hidden layers; same convention as NtkParams
  int width = 1000;         ///< H, neurons per hidden layer
  double beta = 0.0;        ///< bias gradient multiplier
  int samples = 10;         ///< independent initializations averaged over
  std::uint64_t seed = 0;   ///< replicate r uses Rng(mix_seed(seed, r))
};

struct NtkEstimate {
  double mean = 0.0;
  double std_error = 0.0;   ///< sample sd / sqrt(samples); 0 when samples == 1
};

/// Estimates the NTK for one input pair. Deterministic given the config.
NtkEstimate empirical_ntk(VectorRef x, VectorRef z, const FiniteNetConfig& config);

/// Batch form: one estimate per row pair (x.row(i), z.row(i)) and per beta,
/// indexed [beta][pair]. All pairs and betas share the same replicate
/// networks (the forward pass is beta-independent because biases are zero at
/// init), so a wide batch costs the same weight sampling as a single pair.
/// config.beta is ignored; betas supplies the grid.
std::vector<std::vector<NtkEstimate>> empirical_ntk_batch(
    const Matrix& x, const Matrix& z, const FiniteNetConfig& config,
    const std::vector<double>& betas);

}  // namespace ntkgp
