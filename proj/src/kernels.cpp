#include "ntkgp/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace ntkgp {
namespace {

constexpr double kPi = std::numbers::pi_v<double>;
constexpr double kCosineClampTol = 1e-9;

// Floating point may push |lambda| slightly past 1; anything beyond the
// tolerance indicates a real domain violation rather than roundoff.
double clamp_cosine(double u) {
  if (!(std::abs(u) <= 1.0 + kCosineClampTol)) {
    throw std::domain_error("cosine argument " + std::to_string(u) +
                            " outside [-1, 1] beyond clamp tolerance");
  }
  return std::clamp(u, -1.0, 1.0);
}

void check_pair(const VectorRef& x, const VectorRef& z) {
  if (x.size() != z.size()) {
    throw std::invalid_argument("input vectors differ in dimension (" +
                                std::to_string(x.size()) + " vs " +
                                std::to_string(z.size()) + ")");
  }
  if (x.size() == 0) {
    throw std::invalid_argument("empty input vectors");
  }
}

void check_ntk_params(const NtkParams& p) {
  if (p.depth < 0) {
    throw std::invalid_argument("NTK depth must be >= 0");
  }
  if (!(p.beta >= 0.0)) {
    throw std::invalid_argument("NTK beta must be >= 0");
  }
}

// Raw NTK recursion from the three inner products. The diagonal Sigma values
// are invariant under the recursion (kappa1(1) = 1), so only the cross term
// is propagated; cross-diagonal symmetry is exact because every expression is
// symmetric in (sxx, szz).
double theta_from_products(double sxz, double sxx, double szz, int depth,
                           double beta) {
  if (sxx <= 0.0 || szz <= 0.0) {
    throw std::domain_error("degenerate input: zero-norm vector in NTK recursion");
  }
  const double b2 = beta * beta;
  const double denom = std::sqrt(sxx * szz);
  double theta = sxz + b2;
  for (int h = 0; h < depth; ++h) {
    const double lam = clamp_cosine(sxz / denom);
    sxz = kappa1(lam) * denom;
    theta = theta * kappa0(lam) + sxz + b2;
  }
  return theta;
}

// Same recursion, also accumulating dTheta/dbeta = dTheta' * Sigma_dot + 2 beta.
void theta_with_beta_grad(double sxz, double sxx, double szz, int depth,
                          double beta, double* theta_out, double* dtheta_out) {
  if (sxx <= 0.0 || szz <= 0.0) {
    throw std::domain_error("degenerate input: zero-norm vector in NTK recursion");
  }
  const double b2 = beta * beta;
  const double denom = std::sqrt(sxx * szz);
  double theta = sxz + b2;
  double dtheta = 2.0 * beta;
  for (int h = 0; h < depth; ++h) {
    const double lam = clamp_cosine(sxz / denom);
    const double sdot = kappa0(lam);
    sxz = kappa1(lam) * denom;
    theta = theta * sdot + sxz + b2;
    dtheta = dtheta * sdot + 2.0 * beta;
  }
  *theta_out = theta;
  *dtheta_out = dtheta;
}

double normalized_from_products(double sxz, double sxx, double szz, int depth,
                                double beta) {
  const double theta = theta_from_products(sxz, sxx, szz, depth, beta);
  const double b2 = beta * beta;
  // Closed-form diagonals: Theta^(depth)(x,x) = (depth+1)(|x|^2 + beta^2).
  const double diag = (depth + 1) * std::sqrt((sxx + b2) * (szz + b2));
  return theta / diag;
}

double squared_distance(const VectorRef& x, const VectorRef& z) {
  return (x - z).squaredNorm();
}

void check_length_scale(double l) {
  if (!(l > 0.0)) {
    throw std::invalid_argument("length scale must be > 0");
  }
}

// Scaled kernel entry from precomputed products (Gram fast path).
double entry_from_products(const KernelSpec& spec, double sxz, double sxx,
                           double szz, double r2) {
  switch (spec.family) {
    case KernelFamily::kNtk:
      return spec.constant *
             normalized_from_products(sxz, sxx, szz, spec.depth, spec.beta);
    case KernelFamily::kLaplace:
      return spec.constant * std::exp(-std::sqrt(r2) / spec.length_scale);
    case KernelFamily::kGaussian:
      return spec.constant *
             std::exp(-r2 / (2.0 * spec.length_scale * spec.length_scale));
  }
  throw std::logic_error("unreachable kernel family");
}

void check_spec(const KernelSpec& spec) {
  if (!(spec.constant > 0.0)) {
    throw std::invalid_argument("kernel constant must be > 0");
  }
  if (!(spec.noise >= 0.0)) {
    throw std::invalid_argument("kernel noise must be >= 0");
  }
  if (spec.family == KernelFamily::kNtk) {
    check_ntk_params(NtkParams{spec.depth, spec.beta, spec.constant, spec.noise});
  } else {
    check_length_scale(spec.length_scale);
  }
}

template <bool Parallel>
Matrix gram_impl(const KernelSpec& spec, const Matrix& a, const Matrix& b) {
  check_spec(spec);
  if (a.cols() != b.cols()) {
    throw std::invalid_argument("gram: column dimensions differ (" +
                                std::to_string(a.cols()) + " vs " +
                                std::to_string(b.cols()) + ")");
  }
  const bool symmetric = (&a == &b);
  const bool add_noise = symmetric && spec.noise_on;
  const Eigen::Index n = a.rows();
  const Eigen::Index m = b.rows();
  const Vector sq_a = a.rowwise().squaredNorm();
  const Vector sq_b = symmetric ? sq_a : Vector(b.rowwise().squaredNorm());
  Matrix k(n, m);

  if (symmetric) {
    // Upper triangle flattened so iterations are independent and identically
    // ordered no matter the schedule; each entry mirrors to its transpose.
#pragma omp parallel for schedule(static) if (Parallel)
    for (long long idx = 0; idx < static_cast<long long>(n) * n; ++idx) {
      const Eigen::Index i = static_cast<Eigen::Index>(idx / n);
      const Eigen::Index j = static_cast<Eigen::Index>(idx % n);
      if (j < i) continue;
      if (i == j) {
        const double diag =
            entry_from_products(spec, sq_a[i], sq_a[i], sq_a[i], 0.0);
        k(i, i) = add_noise ? diag + spec.noise : diag;
        continue;
      }
      const double sxz = a.row(i).dot(b.row(j));
      const double r2 = (a.row(i) - b.row(j)).squaredNorm();
      const double v = entry_from_products(spec, sxz, sq_a[i], sq_b[j], r2);
      k(i, j) = v;
      k(j, i) = v;
    }
    return k;
  }

#pragma omp parallel for schedule(static) if (Parallel)
  for (long long idx = 0; idx < static_cast<long long>(n) * m; ++idx) {
    const Eigen::Index i = static_cast<Eigen::Index>(idx / m);
    const Eigen::Index j = static_cast<Eigen::Index>(idx % m);
    const double sxz = a.row(i).dot(b.row(j));
    const double r2 = (a.row(i) - b.row(j)).squaredNorm();
    k(i, j) = entry_from_products(spec, sxz, sq_a[i], sq_b[j], r2);
  }
  return k;
}

}  // namespace

double kappa0(double u) {
  const double v = clamp_cosine(u);
  return (kPi - std::acos(v)) / kPi;
}

double kappa1(double u) {
  const double v = clamp_cosine(u);
  return (v * (kPi - std::acos(v)) + std::sqrt(std::max(0.0, 1.0 - v * v))) /
         kPi;
}

const char* hyper_name(Hyper h) {
  switch (h) {
    case Hyper::kBeta: return "beta";
    case Hyper::kLengthScale: return "length_scale";
    case Hyper::kConstant: return "constant";
    case Hyper::kNoise: return "noise";
  }
  return "?";
}

KernelSpec KernelSpec::ntk(int depth, double beta) {
  KernelSpec s;
  s.family = KernelFamily::kNtk;
  s.depth = depth;
  s.beta = beta;
  return s;
}

KernelSpec KernelSpec::laplace(double length_scale) {
  KernelSpec s;
  s.family = KernelFamily::kLaplace;
  s.length_scale = length_scale;
  return s;
}

KernelSpec KernelSpec::gaussian(double length_scale) {
  KernelSpec s;
  s.family = KernelFamily::kGaussian;
  s.length_scale = length_scale;
  return s;
}

NtkParams KernelSpec::ntk_params() const {
  return NtkParams{depth, beta, constant, noise};
}

MaternParams KernelSpec::matern_params() const {
  return MaternParams{family == KernelFamily::kGaussian ? Smoothness::kInfinite
                                                        : Smoothness::kOneHalf,
                      length_scale, constant, noise};
}

double KernelSpec::value_of(Hyper h) const {
  switch (h) {
    case Hyper::kBeta:
      if (family != KernelFamily::kNtk) break;
      return beta;
    case Hyper::kLengthScale:
      if (family == KernelFamily::kNtk) break;
      return length_scale;
    case Hyper::kConstant:
      return constant;
    case Hyper::kNoise:
      if (!noise_on) break;
      return noise;
  }
  throw std::invalid_argument(std::string("hyperparameter '") + hyper_name(h) +
                              "' does not apply to this kernel");
}

const HyperBounds& KernelSpec::bounds_of(Hyper h) const {
  (void)value_of(h);  // applicability check
  switch (h) {
    case Hyper::kBeta: return beta_bounds;
    case Hyper::kLengthScale: return length_bounds;
    case Hyper::kConstant: return constant_bounds;
    case Hyper::kNoise: return noise_bounds;
  }
  throw std::logic_error("unreachable hyperparameter");
}

void KernelSpec::set_value(Hyper h, double v) {
  (void)value_of(h);  // applicability check
  switch (h) {
    case Hyper::kBeta: beta = v; return;
    case Hyper::kLengthScale: length_scale = v; return;
    case Hyper::kConstant: constant = v; return;
    case Hyper::kNoise: noise = v; return;
  }
}

double ntk_eval(const VectorRef& x, const VectorRef& z, const NtkParams& p) {
  check_pair(x, z);
  check_ntk_params(p);
  return theta_from_products(x.dot(z), x.squaredNorm(), z.squaredNorm(),
                             p.depth, p.beta);
}

double ntk_eval_normalized(const VectorRef& x, const VectorRef& z,
                           const NtkParams& p) {
  check_pair(x, z);
  check_ntk_params(p);
  return normalized_from_products(x.dot(z), x.squaredNorm(), z.squaredNorm(),
                                  p.depth, p.beta);
}

double ntk_beta_grad(const VectorRef& x, const VectorRef& z,
                     const NtkParams& p) {
  check_pair(x, z);
  check_ntk_params(p);
  const double sxx = x.squaredNorm();
  const double szz = z.squaredNorm();
  if (sxx <= 0.0 || szz <= 0.0) {
    throw std::domain_error("degenerate input: zero-norm vector in NTK recursion");
  }
  const double b2 = p.beta * p.beta;
  double theta = 0.0;
  double dtheta = 0.0;
  theta_with_beta_grad(x.dot(z), sxx, szz, p.depth, p.beta, &theta, &dtheta);
  // Quotient rule on Theta/sqrt(Theta_xx Theta_zz) with the closed-form
  // diagonals: d/dbeta log sqrt(Theta_xx Theta_zz)
  //   = beta/(|x|^2+beta^2) + beta/(|z|^2+beta^2).
  const double diag = (p.depth + 1) * std::sqrt((sxx + b2) * (szz + b2));
  const double dlog = p.beta / (sxx + b2) + p.beta / (szz + b2);
  return dtheta / diag - (theta / diag) * dlog;
}

double ntk_shallow_limit(const VectorRef& x, const VectorRef& z) {
  check_pair(x, z);
  const double sxx = x.squaredNorm();
  const double szz = z.squaredNorm();
  if (sxx <= 0.0 || szz <= 0.0) {
    throw std::domain_error("degenerate input: zero-norm vector");
  }
  const double lam = clamp_cosine(x.dot(z) / std::sqrt(sxx * szz));
  return 2.0 - std::acos(lam) / kPi;
}

double laplace_eval(const VectorRef& x, const VectorRef& z,
                    const MaternParams& p) {
  check_pair(x, z);
  check_length_scale(p.length_scale);
  return std::exp(-std::sqrt(squared_distance(x, z)) / p.length_scale);
}

double gaussian_eval(const VectorRef& x, const VectorRef& z,
                     const MaternParams& p) {
  check_pair(x, z);
  check_length_scale(p.length_scale);
  return std::exp(-squared_distance(x, z) /
                  (2.0 * p.length_scale * p.length_scale));
}

double kernel_value(const KernelSpec& spec, const VectorRef& x,
                    const VectorRef& z) {
  check_pair(x, z);
  check_spec(spec);
  return entry_from_products(spec, x.dot(z), x.squaredNorm(), z.squaredNorm(),
                             squared_distance(x, z));
}

Matrix gram(const KernelSpec& spec, const Matrix& a, const Matrix& b) {
  return gram_impl<true>(spec, a, b);
}

Matrix gram(const KernelSpec& spec, const Matrix& a) {
  return gram_impl<true>(spec, a, a);
}

Matrix gram_serial(const KernelSpec& spec, const Matrix& a, const Matrix& b) {
  return gram_impl<false>(spec, a, b);
}

Matrix gram_serial(const KernelSpec& spec, const Matrix& a) {
  return gram_impl<false>(spec, a, a);
}

std::vector<Hyper> free_hypers(const KernelSpec& spec) {
  std::vector<Hyper> out;
  if (spec.family == KernelFamily::kNtk) {
    if (!spec.beta_bounds.fixed) out.push_back(Hyper::kBeta);
  } else {
    if (!spec.length_bounds.fixed) out.push_back(Hyper::kLengthScale);
  }
  if (!spec.constant_bounds.fixed) out.push_back(Hyper::kConstant);
  if (spec.noise_on && !spec.noise_bounds.fixed) out.push_back(Hyper::kNoise);
  return out;
}

Matrix hyper_grad(const KernelSpec& spec, const Matrix& a, Hyper which) {
  check_spec(spec);
  (void)spec.value_of(which);  // applicability check
  if (spec.bounds_of(which).fixed) {
    throw std::invalid_argument(std::string("gradient requested for fixed "
                                            "hyperparameter '") +
                                hyper_name(which) + "'");
  }
  const Eigen::Index n = a.rows();

  switch (which) {
    case Hyper::kNoise:
      // d(K)/d(log sigma^2) = sigma^2 * I.
      return Matrix(spec.noise * Matrix::Identity(n, n));
    case Hyper::kConstant: {
      // d(K)/d(log c) = c * k = K minus its noise term.
      KernelSpec noiseless = spec;
      noiseless.noise_on = false;
      return gram(noiseless, a);
    }
    case Hyper::kLengthScale: {
      // Laplace: l * dk/dl = k * r/l; Gaussian: l * dk/dl = k * r^2/l^2.
      KernelSpec noiseless = spec;
      noiseless.noise_on = false;
      Matrix g = gram(noiseless, a);
      const double l = spec.length_scale;
      for (Eigen::Index i = 0; i < n; ++i) {
        g(i, i) = 0.0;  // r = 0
        for (Eigen::Index j = i + 1; j < n; ++j) {
          const double r2 = (a.row(i) - a.row(j)).squaredNorm();
          const double factor = spec.family == KernelFamily::kLaplace
                                    ? std::sqrt(r2) / l
                                    : r2 / (l * l);
          g(i, j) *= factor;
          g(j, i) = g(i, j);
        }
      }
      return g;
    }
    case Hyper::kBeta: {
      // beta * d(c * normalized NTK)/dbeta; the normalized diagonal is
      // constant 1, so diagonal entries are exactly 0.
      Matrix g(n, n);
      const NtkParams p = spec.ntk_params();
#pragma omp parallel for schedule(static)
      for (long long idx = 0; idx < static_cast<long long>(n) * n; ++idx) {
        const Eigen::Index i = static_cast<Eigen::Index>(idx / n);
        const Eigen::Index j = static_cast<Eigen::Index>(idx % n);
        if (j < i) continue;
        if (i == j) {
          g(i, i) = 0.0;
          continue;
        }
        const double v = spec.constant * spec.beta *
                         ntk_beta_grad(a.row(i).transpose(),
                                       a.row(j).transpose(), p);
        g(i, j) = v;
        g(j, i) = v;
      }
      return g;
    }
  }
  throw std::logic_error("unreachable hyperparameter");
}

std::vector<Matrix> hyper_grads(const KernelSpec& spec, const Matrix& a) {
  std::vector<Matrix> out;
  for (Hyper h : free_hypers(spec)) {
    out.push_back(hyper_grad(spec, a, h));
  }
  return out;
}

}  // namespace ntkgp
