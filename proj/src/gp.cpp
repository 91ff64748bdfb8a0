#include <ntkgp/gp.hpp>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <utility>
#include <vector>

#include <Eigen/Cholesky>

#include <ntkgp/errors.hpp>
#include <ntkgp/optim.hpp>
#include <ntkgp/rng.hpp>

namespace ntkgp {
namespace {

// Objective value reported for starts whose covariance cannot be factorized;
// large enough that any feasible start wins, finite so the optimizer can
// compare against it while backtracking.
constexpr double kInfeasible = 1e100;

struct YStats {
  Vector scaled;
  double mean = 0.0;
  double scale = 1.0;
};

YStats rescale_response(const Vector& y, bool enabled) {
  if (!enabled) return {y, 0.0, 1.0};
  const double mean = y.mean();
  const double var = (y.array() - mean).square().sum() / static_cast<double>(y.size());
  const double sd = std::sqrt(var);
  const double scale = sd > 0.0 ? sd : 1.0;
  return {Vector((y.array() - mean) / scale), mean, scale};
}

Matrix training_cov(const Matrix& x, const KernelSpec& kernel, double alpha) {
  Matrix k = gram(kernel, x);
  k.diagonal().array() += alpha;
  return k;
}

Eigen::LLT<Matrix> factorize(const Matrix& cov) {
  Eigen::LLT<Matrix> llt(cov);
  if (llt.info() != Eigen::Success)
    throw ConditioningError(
        "covariance matrix is not positive definite (Cholesky failed); "
        "increase alpha or adjust hyperparameter bounds");
  return llt;
}

void check_training_data(const Matrix& x, const Vector& y) {
  if (x.rows() < 1) throw std::invalid_argument("gp: empty training set");
  if (x.rows() != y.size())
    throw std::invalid_argument("gp: X rows and y length must match");
}

}  // namespace

MllResult log_marginal_likelihood(const Matrix& x, const Vector& y,
                                  const KernelSpec& kernel, double alpha) {
  check_training_data(x, y);
  if (!(alpha >= 0.0)) throw std::invalid_argument("gp: alpha must be >= 0");

  const Eigen::Index n = x.rows();
  const auto llt = factorize(training_cov(x, kernel, alpha));
  const Vector w = llt.solve(y);
  const double log_det =
      Matrix(llt.matrixL()).diagonal().array().log().sum();

  MllResult result;
  result.value = -0.5 * y.dot(w) - log_det -
                 0.5 * static_cast<double>(n) *
                     std::log(2.0 * std::numbers::pi_v<double>);

  const auto free = free_hypers(kernel);
  result.grad.resize(static_cast<Eigen::Index>(free.size()));
  if (!free.empty()) {
    const Matrix k_inv = llt.solve(Matrix::Identity(n, n));
    for (std::size_t j = 0; j < free.size(); ++j) {
      const Matrix dk = hyper_grad(kernel, x, free[j]);
      result.grad[static_cast<Eigen::Index>(j)] =
          0.5 * (w.dot(dk * w) - k_inv.cwiseProduct(dk).sum());
    }
  }
  return result;
}

GpModel fit(const Matrix& x, const Vector& y, const KernelSpec& kernel,
            const FitOptions& options) {
  check_training_data(x, y);
  if (!(options.alpha > 0.0)) throw std::invalid_argument("gp: alpha must be > 0");
  if (options.n_restart < 0)
    throw std::invalid_argument("gp: n_restart must be >= 0");

  const YStats stats = rescale_response(y, options.y_rescale);
  const auto free = free_hypers(kernel);

  KernelSpec best = kernel;
  double best_mll = -std::numeric_limits<double>::infinity();

  if (free.empty()) {
    best_mll = log_marginal_likelihood(x, stats.scaled, kernel, options.alpha).value;
  } else {
    const Eigen::Index k = static_cast<Eigen::Index>(free.size());
    Vector lo(k), hi(k), start(k);
    for (Eigen::Index j = 0; j < k; ++j) {
      const HyperBounds& b = kernel.bounds_of(free[static_cast<std::size_t>(j)]);
      lo[j] = std::log(b.lo);
      hi[j] = std::log(b.hi);
      const double v = std::clamp(
          kernel.value_of(free[static_cast<std::size_t>(j)]), b.lo, b.hi);
      start[j] = std::log(v);
    }

    const ObjectiveWithGrad objective = [&](const Vector& v, Vector& grad) {
      KernelSpec candidate = kernel;
      for (Eigen::Index j = 0; j < k; ++j)
        candidate.set_value(free[static_cast<std::size_t>(j)], std::exp(v[j]));
      try {
        MllResult r = log_marginal_likelihood(x, stats.scaled, candidate,
                                              options.alpha);
        grad = -r.grad;
        return -r.value;
      } catch (const ConditioningError&) {
        grad = Vector::Zero(k);
        return kInfeasible;
      }
    };

    BoxMinOptions box;
    box.max_iter = options.max_iter;
    box.grad_tol = options.grad_tol;

    Vector best_point;
    for (int r = 0; r <= options.n_restart; ++r) {
      Vector x0 = start;
      if (r > 0) {
        Rng rng(mix_seed(options.seed, static_cast<std::uint64_t>(r)));
        for (Eigen::Index j = 0; j < k; ++j) x0[j] = uniform(rng, lo[j], hi[j]);
      }
      const BoxMinResult res = minimize_box(objective, x0, lo, hi, box);
      const double mll = -res.fx;
      if (mll > -0.5 * kInfeasible && mll > best_mll) {
        best_mll = mll;
        best_point = res.x;
      }
    }
    if (!std::isfinite(best_mll))
      throw ConditioningError(
          "gp fit: every optimizer start failed to factorize the covariance");
    for (Eigen::Index j = 0; j < k; ++j)
      best.set_value(free[static_cast<std::size_t>(j)], std::exp(best_point[j]));
  }

  const auto llt = factorize(training_cov(x, best, options.alpha));
  GpModel model;
  model.x_train = x;
  model.y_train = y;
  model.kernel = best;
  model.chol_lower = llt.matrixL();
  model.dual = llt.solve(stats.scaled);
  model.y_mean = stats.mean;
  model.y_scale = stats.scale;
  model.mll = best_mll;
  model.alpha = options.alpha;
  return model;
}

GpModel prior_model(const KernelSpec& kernel, double alpha) {
  if (!(alpha > 0.0)) throw std::invalid_argument("gp: alpha must be > 0");
  GpModel model;
  model.kernel = kernel;
  model.alpha = alpha;
  return model;
}

namespace {

void check_test_inputs(const GpModel& model, const Matrix& x_test) {
  if (model.x_train.rows() > 0 && x_test.cols() != model.x_train.cols())
    throw std::invalid_argument("gp: test input dimension mismatch");
}

}  // namespace

Vector predict_mean(const GpModel& model, const Matrix& x_test) {
  check_test_inputs(model, x_test);
  if (model.x_train.rows() == 0)
    return Vector::Zero(x_test.rows());  // zero-mean prior
  const Matrix k_cross = gram(model.kernel, x_test, model.x_train);
  return (model.y_mean + (model.y_scale * (k_cross * model.dual)).array())
      .matrix();
}

Matrix predict_cov(const GpModel& model, const Matrix& x_test) {
  check_test_inputs(model, x_test);
  KernelSpec latent = model.kernel;  // test prior excludes the noise term
  latent.noise_on = false;
  Matrix k_ss = gram(latent, x_test);
  if (model.x_train.rows() == 0) return k_ss;
  const Matrix k_cross = gram(model.kernel, x_test, model.x_train);
  const Matrix v = model.chol_lower.triangularView<Eigen::Lower>().solve(
      Matrix(k_cross.transpose()));
  return (model.y_scale * model.y_scale) * (k_ss - v.transpose() * v);
}

Matrix sample(const GpModel& model, const Matrix& x_test, int count,
              std::uint64_t seed) {
  if (count < 0) throw std::invalid_argument("gp: sample count must be >= 0");
  const Eigen::Index m = x_test.rows();
  if (count == 0) return Matrix(0, m);

  const Vector mean = predict_mean(model, x_test);
  Matrix cov = predict_cov(model, x_test);
  cov.diagonal().array() += model.alpha;
  const auto llt = factorize(cov);
  const Matrix l = llt.matrixL();

  Rng rng(seed);
  Matrix draws(count, m);
  Vector eta(m);
  for (int i = 0; i < count; ++i) {
    for (Eigen::Index j = 0; j < m; ++j) eta[j] = gaussian(rng);
    draws.row(i) = (mean + l * eta).transpose();
  }
  return draws;
}

}  // namespace ntkgp
