#pragma once

#include <Eigen/Core>

#include <vector>

// Analytic kernels: the recursive infinite-width NTK (normalized form,
// beta-gradient, large-beta shallow limit), Laplace and Gaussian kernels,
// constant scaling, white-noise term, Gram assembly, and the log-space
// hyperparameter gradients the marginal-likelihood optimizer consumes.
namespace ntkgp {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using VectorRef = Eigen::Ref<const Eigen::VectorXd>;

/// Arc-cosine kernel of degree 0: (1/pi)(pi - arccos u).
/// Inputs outside [-1,1] by at most 1e-9 are clamped; beyond that -> domain error.
[[nodiscard]] double kappa0(double u);

/// Arc-cosine kernel of degree 1: (1/pi)(u(pi - arccos u) + sqrt(1 - u^2)).
[[nodiscard]] double kappa1(double u);

/// NTK hyperparameters.
///
/// `depth` counts the hidden (ReLU) layers, i.e. the number of arc-cosine
/// recursion steps: the kernel is Theta^(depth) with Theta^(0) = x.z + beta^2.
/// The effective network is depth+1 weight layers deep, so the diagonal is
/// Theta^(depth)(x,x) = (depth+1)(|x|^2 + beta^2). Depth labels in the
/// benchmark tables ("NTK depth 2, 3, 10") map directly onto this parameter.
struct NtkParams {
  int depth = 3;        // hidden layers, >= 0
  double beta = 0.0;    // bias scale, >= 0
  double constant = 1.0;  // multiplicative scale c, > 0
  double noise = 0.0;     // white-noise weight sigma^2, >= 0
};

enum class Smoothness { kOneHalf, kInfinite };

/// Matern hyperparameters, restricted to the two closed forms the experiments
/// use: nu = 1/2 (Laplace) and nu -> infinity (Gaussian).
struct MaternParams {
  Smoothness nu = Smoothness::kOneHalf;
  double length_scale = 1.0;  // > 0
  double constant = 1.0;      // > 0
  double noise = 0.0;         // >= 0
};

/// Box bounds for one log-space-optimized hyperparameter.
struct HyperBounds {
  double lo = 1e-5;
  double hi = 1e5;
  bool fixed = false;  // fixed parameters are excluded from optimization
};

enum class KernelFamily { kNtk, kLaplace, kGaussian };

/// Identifies one optimizable hyperparameter of a KernelSpec.
enum class Hyper { kBeta, kLengthScale, kConstant, kNoise };

[[nodiscard]] const char* hyper_name(Hyper h);

/// Tagged description of one kernel with hyperparameters, bounds, and
/// fixed/free flags. The effective covariance is
///   K(x,z) = c * k(x,z) + sigma^2 * delta(x,z)
/// where k is the normalized NTK, Laplace, or Gaussian kernel, and the
/// white-noise delta term participates only when `noise_on` is set (and only
/// on the diagonal of a symmetric training Gram).
struct KernelSpec {
  KernelFamily family = KernelFamily::kNtk;

  int depth = 3;  // NTK only: hidden layers (see NtkParams)
  double beta = 0.0;
  HyperBounds beta_bounds{};

  double length_scale = 1.0;  // Laplace/Gaussian only
  HyperBounds length_bounds{};

  double constant = 1.0;
  HyperBounds constant_bounds{1e-5, 1e5, true};

  double noise = 0.0;  // sigma^2
  HyperBounds noise_bounds{1e-5, 1e5, true};
  bool noise_on = false;

  [[nodiscard]] static KernelSpec ntk(int depth, double beta = 0.0);
  [[nodiscard]] static KernelSpec laplace(double length_scale = 1.0);
  [[nodiscard]] static KernelSpec gaussian(double length_scale = 1.0);

  [[nodiscard]] NtkParams ntk_params() const;
  [[nodiscard]] MaternParams matern_params() const;

  /// Current value / bounds of one hyperparameter; throws std::invalid_argument
  /// if `h` does not apply to this family.
  [[nodiscard]] double value_of(Hyper h) const;
  [[nodiscard]] const HyperBounds& bounds_of(Hyper h) const;
  void set_value(Hyper h, double v);
};

/// Raw recursive NTK Theta^(depth)(x,z).
/// Throws std::invalid_argument on dimension/parameter violations and
/// std::domain_error on zero-norm (degenerate) inputs.
[[nodiscard]] double ntk_eval(const VectorRef& x, const VectorRef& z,
                              const NtkParams& p);

/// Normalized NTK: Theta(x,z)/sqrt(Theta(x,x) Theta(z,z)), diagonal exactly 1.
/// For unit-sphere inputs this equals Theta^(depth) / ((depth+1)(beta^2+1)),
/// a constant normalizer; off the sphere the cosine form keeps the diagonal
/// pinned at 1 while magnitudes still enter through x.z.
[[nodiscard]] double ntk_eval_normalized(const VectorRef& x, const VectorRef& z,
                                         const NtkParams& p);

/// d/d(beta) of ntk_eval_normalized, via the layerwise recursion
/// dTheta^(h) = dTheta^(h-1) * Sigma_dot^(h) + 2 beta (no Sigma_dot division,
/// so antipodal inputs are safe). Identically 0 at beta = 0.
[[nodiscard]] double ntk_beta_grad(const VectorRef& x, const VectorRef& z,
                                   const NtkParams& p);

/// The beta -> infinity limit of the one-hidden-layer kernel in its
/// conventional unnormalized form: 2 - arccos(lambda0)/pi with
/// lambda0 = x.z/(|x||z|). That convention carries no 1/2 normalizer, so the
/// tested identity is
///   ntk_shallow_limit(x,z) == 2 * ntk_eval_normalized(x,z,{depth=1,beta->inf}).
[[nodiscard]] double ntk_shallow_limit(const VectorRef& x, const VectorRef& z);

/// Laplace kernel exp(-|x-z|/l) (Matern nu=1/2).
[[nodiscard]] double laplace_eval(const VectorRef& x, const VectorRef& z,
                                  const MaternParams& p);

/// Gaussian kernel exp(-|x-z|^2/(2 l^2)) (Matern nu->infinity).
[[nodiscard]] double gaussian_eval(const VectorRef& x, const VectorRef& z,
                                   const MaternParams& p);

/// Scaled kernel value c * k(x,z) for the spec's family (no noise term).
[[nodiscard]] double kernel_value(const KernelSpec& spec, const VectorRef& x,
                                  const VectorRef& z);

/// Gram matrix, rows of A x rows of B; entry (i,j) = c * k(a_i, b_j).
/// When both arguments are the same object and noise is on, sigma^2 is added
/// to the diagonal (white-noise kernel = Kronecker delta on training points).
/// Entries are computed independently (OpenMP), so results are deterministic
/// regardless of thread count and bitwise equal to gram_serial.
[[nodiscard]] Matrix gram(const KernelSpec& spec, const Matrix& a,
                          const Matrix& b);
[[nodiscard]] Matrix gram(const KernelSpec& spec, const Matrix& a);

/// Single-threaded reference implementation of gram, kept for testing and
/// benchmarking the parallel path.
[[nodiscard]] Matrix gram_serial(const KernelSpec& spec, const Matrix& a,
                                 const Matrix& b);
[[nodiscard]] Matrix gram_serial(const KernelSpec& spec, const Matrix& a);

/// The spec's free (unfixed, applicable) hyperparameters in canonical order:
/// beta/length-scale, constant, noise.
[[nodiscard]] std::vector<Hyper> free_hypers(const KernelSpec& spec);

/// d(K_train)/d(log theta) for one free hyperparameter of the symmetric
/// training Gram (including the noise term). Requesting a fixed or
/// inapplicable hyperparameter is a contract error (std::invalid_argument).
[[nodiscard]] Matrix hyper_grad(const KernelSpec& spec, const Matrix& a,
                                Hyper which);

/// All free-hyperparameter gradient matrices, in free_hypers order.
[[nodiscard]] std::vector<Matrix> hyper_grads(const KernelSpec& spec,
                                              const Matrix& a);

}  // namespace ntkgp
