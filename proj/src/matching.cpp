#include <ntkgp/matching.hpp>

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include <ntkgp/dataio.hpp>
#include <ntkgp/optim.hpp>
#include <ntkgp/rng.hpp>

namespace ntkgp {

double length_scale_from_pair(const VectorRef& x, const VectorRef& z, int depth,
                              double beta) {
  const double k = ntk_eval_normalized(x, z, {depth, beta, 1.0, 0.0});
  if (!(k < 1.0))
    throw std::domain_error(
        "length_scale_from_pair: degenerate pair (normalized kernel >= 1, "
        "-log -> 0)");
  if (!(k > 0.0))
    throw std::domain_error(
        "length_scale_from_pair: normalized kernel <= 0, no Laplace inverse");
  return (x - z).norm() / -std::log(k);
}

double d_theta(const VectorRef& x, const VectorRef& z, int depth, double beta,
               double ell) {
  const double k = ntk_eval_normalized(x, z, {depth, beta, 1.0, 0.0});
  const double lap = laplace_eval(x, z, {Smoothness::kOneHalf, ell, 1.0, 0.0});
  return std::abs(k - lap);
}

double default_beta_max(int depth) {
  if (depth < 0) throw std::invalid_argument("default_beta_max: depth < 0");
  if (depth <= 2) return 50.0;
  if (depth <= 5) return 10.0;
  return 1e-3;
}

namespace {

void sample_sphere_pair(Rng& rng, SphereSampler sampler, Vector& x, Vector& z) {
  auto fill = [&](Vector& v) {
    double norm2 = 0.0;
    do {
      for (Eigen::Index i = 0; i < v.size(); ++i) {
        v[i] = sampler == SphereSampler::kPositiveUniform ? uniform01(rng)
                                                          : gaussian(rng);
      }
      norm2 = v.squaredNorm();
    } while (norm2 == 0.0);
    v /= std::sqrt(norm2);
  };
  fill(x);
  fill(z);
}

}  // namespace

MatchReport match_bias_lengthscale(int depth, int n,
                                   const Algorithm1Options& options,
                                   std::vector<BetaGridPoint>* curve) {
  if (depth < 0) throw std::invalid_argument("match: depth must be >= 0");
  if (n < 2) throw std::invalid_argument("match: need n >= 2 pairs");
  if (options.dim < 1) throw std::invalid_argument("match: dim must be >= 1");
  if (options.grid_size < 2)
    throw std::invalid_argument("match: grid_size must be >= 2");
  const double beta_max =
      options.beta_max > 0.0 ? options.beta_max : default_beta_max(depth);

  // beta = 0 plus a log-spaced sweep over three decades up to beta_max.
  std::vector<double> betas(static_cast<std::size_t>(options.grid_size));
  betas[0] = 0.0;
  const int m = options.grid_size - 1;
  const double lo = beta_max * 1e-3;
  for (int j = 1; j <= m; ++j) {
    const double t = m == 1 ? 1.0 : static_cast<double>(j - 1) / (m - 1);
    betas[static_cast<std::size_t>(j)] =
        lo * std::pow(beta_max / lo, t);
  }

  struct Cell {
    double mean = 0.0;
    double var = 0.0;
    long kept = 0;
  };
  std::vector<Cell> cells(betas.size());

  // Every cell re-seeds identically, so all betas see the same pairs and the
  // variance curve is smooth in beta; cells are embarrassingly parallel.
#pragma omp parallel for schedule(dynamic)
  for (long long c = 0; c < static_cast<long long>(betas.size()); ++c) {
    const double beta = betas[static_cast<std::size_t>(c)];
    Rng rng(options.seed);
    Vector x(options.dim), z(options.dim);
    double sum = 0.0, sum2 = 0.0;
    long kept = 0;
    for (int i = 0; i < n; ++i) {
      sample_sphere_pair(rng, options.sampler, x, z);
      const double k = ntk_eval_normalized(x, z, {depth, beta, 1.0, 0.0});
      if (!(k > 0.0 && k < 1.0)) continue;  // degenerate pair, excluded
      const double ell = (x - z).norm() / -std::log(k);
      sum += ell;
      sum2 += ell * ell;
      ++kept;
    }
    if (kept == 0) continue;
    const double mean = sum / static_cast<double>(kept);
    cells[static_cast<std::size_t>(c)] = {
        mean, sum2 / static_cast<double>(kept) - mean * mean, kept};
  }
  for (const Cell& cell : cells)
    if (cell.kept == 0)
      throw std::runtime_error(
          "match: a beta cell produced no valid pairs (all samples "
          "degenerate)");

  std::size_t best = 0;
  for (std::size_t c = 1; c < cells.size(); ++c)
    if (cells[c].var < cells[best].var) best = c;

  MatchReport report;
  report.depth = depth;
  report.beta = betas[best];
  report.length_scale = cells[best].mean;
  report.variance = cells[best].var;
  if (report.beta > 0.0 && report.beta * report.beta < 1e-15) {
    report.flagged = true;
    report.note =
        "matched beta^2 is below double precision; reporting beta = 0";
    report.beta = 0.0;
  }

  // Spot-check the kernel gap at the reported optimum on a few fresh pairs.
  {
    Rng rng(options.seed);
    Vector x(options.dim), z(options.dim);
    for (int i = 0; i < 8; ++i) {
      sample_sphere_pair(rng, options.sampler, x, z);
      report.d_theta_samples.push_back(
          d_theta(x, z, depth, report.beta, report.length_scale));
    }
  }

  if (curve) {
    curve->clear();
    curve->reserve(cells.size());
    for (std::size_t c = 0; c < cells.size(); ++c)
      curve->push_back({betas[c], cells[c].mean, cells[c].var});
  }
  return report;
}

namespace {

KernelSpec frozen_matern(KernelFamily family, double ell, double constant,
                         double noise, bool noise_on) {
  if (family == KernelFamily::kNtk)
    throw std::invalid_argument("posterior matching expects a Matérn family");
  KernelSpec spec = family == KernelFamily::kLaplace
                        ? KernelSpec::laplace(ell)
                        : KernelSpec::gaussian(ell);
  spec.length_bounds.fixed = true;
  spec.constant = constant;
  spec.noise = noise;
  spec.noise_on = noise_on;
  return spec;
}

Vector matern_posterior(const KernelSpec& spec, const Matrix& x, const Vector& y,
                        const Matrix& x_test, const FitOptions& options) {
  return predict_mean(fit(x, y, spec, options), x_test);
}

}  // namespace

double posterior_match_objective(KernelFamily matern_family, double ell,
                                 double constant, double noise, bool noise_on,
                                 const Matrix& x, const Vector& y,
                                 const Matrix& x_test, const Vector& target,
                                 const FitOptions& options) {
  if (target.size() != x_test.rows())
    throw std::invalid_argument("posterior_match_objective: target size");
  const KernelSpec spec =
      frozen_matern(matern_family, ell, constant, noise, noise_on);
  return (target - matern_posterior(spec, x, y, x_test, options)).norm();
}

MatchReport posterior_match(const GpModel& ntk_model, KernelFamily matern_family,
                            const Matrix& x_test, const FitOptions& options) {
  if (ntk_model.x_train.rows() < 1)
    throw std::invalid_argument("posterior_match: NTK model has no data");
  if (x_test.rows() < 1)
    throw std::invalid_argument("posterior_match: empty test set");

  const Vector target = predict_mean(ntk_model, x_test);
  const double constant = ntk_model.kernel.constant;
  const double noise = ntk_model.kernel.noise;
  const bool noise_on = ntk_model.kernel.noise_on;
  const Matrix& x = ntk_model.x_train;
  const Vector& y = ntk_model.y_train;

  const auto objective = [&](double ell) {
    return posterior_match_objective(matern_family, ell, constant, noise,
                                     noise_on, x, y, x_test, target, options);
  };

  // The posterior gap need not be unimodal in ell, so a purely local search
  // can settle in the wrong basin. Bracket the global basin with a log-spaced
  // scan, polish inside the bracketing neighbors, and expand the upper bound
  // whenever the optimum touches it.
  constexpr double kEllLo = 1e-3;
  constexpr double kEllCap = 1e5;
  constexpr int kScanCells = 25;
  double hi = 10.0;
  ScalarMinResult res;
  for (;;) {
    std::vector<double> cell(kScanCells), value(kScanCells);
    int best = 0;
    for (int i = 0; i < kScanCells; ++i) {
      const double t = static_cast<double>(i) / (kScanCells - 1);
      cell[static_cast<std::size_t>(i)] =
          std::exp(std::log(kEllLo) + t * (std::log(hi) - std::log(kEllLo)));
      value[static_cast<std::size_t>(i)] =
          objective(cell[static_cast<std::size_t>(i)]);
      if (value[static_cast<std::size_t>(i)] <
          value[static_cast<std::size_t>(best)])
        best = i;
    }
    res = minimize_scalar(
        objective, cell[static_cast<std::size_t>(std::max(best - 1, 0))],
        cell[static_cast<std::size_t>(std::min(best + 1, kScanCells - 1))]);
    if (value[static_cast<std::size_t>(best)] < res.fx) {
      res.x = cell[static_cast<std::size_t>(best)];
      res.fx = value[static_cast<std::size_t>(best)];
    }
    if (res.x > 0.99 * hi && hi < kEllCap) {
      hi = std::min(hi * 10.0, kEllCap);
      continue;
    }
    break;
  }

  MatchReport report;
  report.depth = ntk_model.kernel.family == KernelFamily::kNtk
                     ? ntk_model.kernel.depth
                     : 0;
  report.beta = ntk_model.kernel.family == KernelFamily::kNtk
                    ? ntk_model.kernel.beta
                    : 0.0;
  report.length_scale = res.x;
  report.rmse = res.fx / std::sqrt(static_cast<double>(x_test.rows()));
  const KernelSpec matched =
      frozen_matern(matern_family, res.x, constant, noise, noise_on);
  report.pearson_rho =
      pearson(target, matern_posterior(matched, x, y, x_test, options));
  if (res.x > 0.99 * kEllCap) {
    report.flagged = true;
    report.note = "length-scale search hit the expansion cap at 1e5";
  } else if (!res.converged) {
    report.flagged = true;
    report.note = "1-D minimization stopped on its evaluation budget";
  }
  return report;
}

}  // namespace ntkgp
