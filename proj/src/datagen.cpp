#include <ntkgp/datagen.hpp>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include <ntkgp/rng.hpp>

namespace ntkgp {
namespace {

constexpr double kPi = std::numbers::pi_v<double>;

// Portable bounded integer draw built on uniform01; the floor is strictly
// below `bound` because uniform01 < 1.
std::size_t uniform_index(Rng& rng, std::size_t bound) {
  return static_cast<std::size_t>(uniform01(rng) *
                                  static_cast<double>(bound));
}

std::vector<int> shuffled_indices(Rng& rng, int n) {
  std::vector<int> idx(static_cast<std::size_t>(n));
  std::iota(idx.begin(), idx.end(), 0);
  for (std::size_t i = idx.size(); i > 1; --i)
    std::swap(idx[i - 1], idx[uniform_index(rng, i)]);
  return idx;
}

// One Latin-hypercube draw continuing an existing stream: per dimension a
// fresh stratum permutation, then one uniform offset per stratum.
Matrix lhs_draw(Rng& rng, int n, const SampleBounds& bounds) {
  const auto d = static_cast<Eigen::Index>(bounds.size());
  Matrix x(n, d);
  for (Eigen::Index j = 0; j < d; ++j) {
    const auto [lo, hi] = bounds[static_cast<std::size_t>(j)];
    if (!(hi > lo))
      throw std::invalid_argument("latin_hypercube: bounds must satisfy lo < hi");
    const std::vector<int> strata = shuffled_indices(rng, n);
    const double width = (hi - lo) / n;
    for (int i = 0; i < n; ++i)
      x(i, j) = lo + (strata[static_cast<std::size_t>(i)] + uniform01(rng)) *
                         width;
  }
  return x;
}

void add_noise(Rng& rng, Vector& y, double sd) {
  for (Eigen::Index i = 0; i < y.size(); ++i) y[i] += sd * gaussian(rng);
}

std::string describe(const std::string& name, int n, std::uint64_t seed,
                     double noise_sd) {
  std::ostringstream out;
  out << name << " n=" << n << " seed=" << seed << " noise_sd=" << noise_sd;
  return out.str();
}

void check_n(int n) {
  if (n < 1) throw std::invalid_argument("generator: need n >= 1 samples");
}

}  // namespace

double ackley(double x1, double x2) {
  const double radial = -20.0 * std::exp(-0.2 * std::sqrt(0.5 * (x1 * x1 + x2 * x2)));
  const double wave =
      -std::exp(0.5 * (std::cos(2.0 * kPi * x1) + std::cos(2.0 * kPi * x2)));
  return radial + wave + std::numbers::e_v<double> + 20.0;
}

double franke(double x1, double x2) {
  const double a = 0.75 * std::exp(-(std::pow(9.0 * x1 - 2.0, 2) +
                                     std::pow(9.0 * x2 - 2.0, 2)) /
                                   4.0);
  // the second bump decays linearly in x2, not quadratically
  const double b = 0.75 * std::exp(-std::pow(9.0 * x1 + 1.0, 2) / 49.0 -
                                   (9.0 * x2 + 1.0) / 10.0);
  const double c = 0.5 * std::exp(-(std::pow(9.0 * x1 - 7.0, 2) +
                                    std::pow(9.0 * x2 - 3.0, 2)) /
                                  4.0);
  const double d =
      0.2 * std::exp(-std::pow(9.0 * x1 - 4.0, 2) - std::pow(9.0 * x2 - 7.0, 2));
  return a + b + c - d;
}

double nonpoly(double x1, double x2) {
  return ((30.0 + 5.0 * x1 * std::sin(5.0 * x1)) * (4.0 + std::exp(-5.0 * x2)) -
          100.0) /
         6.0;
}

double friedman1(const VectorRef& x) {
  if (x.size() < 5)
    throw std::invalid_argument("friedman1: needs at least 5 inputs");
  return 10.0 * std::sin(kPi * x[0] * x[1]) + 20.0 * std::pow(x[2] - 0.5, 2) +
         10.0 * x[3] + 5.0 * x[4];
}

double friedman2(const VectorRef& x) {
  if (x.size() < 4)
    throw std::invalid_argument("friedman2: needs at least 4 inputs");
  const double inner = x[1] * x[2] - 1.0 / (x[1] * x[3]);
  return std::sqrt(x[0] * x[0] + inner * inner);
}

double friedman3(const VectorRef& x) {
  if (x.size() < 4)
    throw std::invalid_argument("friedman3: needs at least 4 inputs");
  return std::atan((x[1] * x[2] - 1.0 / (x[1] * x[3])) / x[0]);
}

SampleBounds surface_bounds(Surface which) {
  switch (which) {
    case Surface::kAckley:
      return {{1.0, 7.0}, {1.0, 7.0}};
    case Surface::kFranke:
      return {{-0.5, 1.0}, {-0.5, 1.0}};
    case Surface::kNonpoly:
      return {{0.0, 2.0}, {0.0, 2.0}};
  }
  throw std::invalid_argument("surface_bounds: unknown surface");
}

double surface_noise_sd(Surface which) {
  switch (which) {
    case Surface::kAckley:
      return 0.75;
    case Surface::kFranke:
      return 0.10;
    case Surface::kNonpoly:
      return 1.0;
  }
  throw std::invalid_argument("surface_noise_sd: unknown surface");
}

double friedman_noise_sd(int which) {
  switch (which) {
    case 1:
      return 1.5;
    case 2:
      return 5.0;
    case 3:
      return 0.15;
    default:
      throw std::invalid_argument("friedman_noise_sd: which must be 1, 2, or 3");
  }
}

Matrix latin_hypercube(int n, const SampleBounds& bounds, std::uint64_t seed) {
  check_n(n);
  if (bounds.empty())
    throw std::invalid_argument("latin_hypercube: need at least one dimension");
  Rng rng(seed);
  return lhs_draw(rng, n, bounds);
}

Dataset gen_parametric(int n, std::uint64_t seed, double noise_sd) {
  check_n(n);
  if (noise_sd < 0.0)
    throw std::invalid_argument("gen_parametric: noise_sd must be >= 0");
  Rng rng(seed);
  Dataset data;
  data.x.resize(n, 2);
  data.y.resize(n);
  for (int i = 0; i < n; ++i) {
    const double y = uniform(rng, -2.0, 2.0);
    const double t = uniform(rng, -2.0 * kPi, 2.0 * kPi);
    const double radius = y * y + 1.0;
    data.x(i, 0) = radius * std::sin(t);
    data.x(i, 1) = radius * std::cos(t);
    data.y[i] = y;
  }
  if (noise_sd > 0.0) add_noise(rng, data.y, noise_sd);
  data.provenance = describe("parametric", n, seed, noise_sd);
  return data;
}

Dataset gen_surface(Surface which, int n, std::uint64_t seed, bool noisy) {
  check_n(n);
  Rng rng(seed);
  Dataset data;
  data.x = lhs_draw(rng, n, surface_bounds(which));
  data.y.resize(n);
  for (int i = 0; i < n; ++i) {
    switch (which) {
      case Surface::kAckley:
        data.y[i] = ackley(data.x(i, 0), data.x(i, 1));
        break;
      case Surface::kFranke:
        data.y[i] = franke(data.x(i, 0), data.x(i, 1));
        break;
      case Surface::kNonpoly:
        data.y[i] = nonpoly(data.x(i, 0), data.x(i, 1));
        break;
    }
  }
  const double sd = noisy ? surface_noise_sd(which) : 0.0;
  if (noisy) add_noise(rng, data.y, sd);
  const char* name = which == Surface::kAckley    ? "ackley"
                     : which == Surface::kFranke  ? "franke"
                                                  : "nonpoly";
  data.provenance = describe(name, n, seed, sd);
  return data;
}

Dataset gen_friedman(int which, int n, std::uint64_t seed, bool noisy) {
  check_n(n);
  const double sd = noisy ? friedman_noise_sd(which) : 0.0;
  if (!noisy) (void)friedman_noise_sd(which);  // validate `which` either way
  Rng rng(seed);
  Dataset data;
  if (which == 1) {
    // ten iid U[0,1] columns; the response touches only the first five
    data.x.resize(n, 10);
    data.y.resize(n);
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < 10; ++j) data.x(i, j) = uniform01(rng);
      data.y[i] = friedman1(data.x.row(i).transpose());
    }
  } else {
    data.x.resize(n, 4);
    data.y.resize(n);
    for (int i = 0; i < n; ++i) {
      data.x(i, 0) = 100.0 * (1.0 - uniform01(rng));  // (0, 100], keeps 1/x1 finite
      data.x(i, 1) = uniform(rng, 40.0 * kPi, 560.0 * kPi);
      data.x(i, 2) = uniform01(rng);
      data.x(i, 3) = uniform(rng, 1.0, 11.0);
      data.y[i] = which == 2 ? friedman2(data.x.row(i).transpose())
                             : friedman3(data.x.row(i).transpose());
    }
  }
  if (noisy) add_noise(rng, data.y, sd);
  data.provenance =
      describe("friedman" + std::to_string(which), n, seed, sd);
  return data;
}

void normalize_rows(Matrix& x) {
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    const double norm = x.row(i).norm();
    if (!(norm > 0.0))
      throw std::domain_error("normalize_rows: row " + std::to_string(i) +
                              " has zero norm");
    x.row(i) /= norm;
  }
}

void normalize_to_sphere(Dataset& data) {
  normalize_rows(data.x);
  data.normalized = true;
}

RescaleStats compute_rescale(const Matrix& x, bool by_variance) {
  if (x.rows() < 1)
    throw std::invalid_argument("compute_rescale: empty matrix");
  RescaleStats stats;
  stats.by_variance = by_variance;
  stats.mean = x.colwise().mean();
  stats.scale.resize(x.cols());
  for (Eigen::Index j = 0; j < x.cols(); ++j) {
    const double var =
        (x.col(j).array() - stats.mean[j]).square().sum() / x.rows();
    stats.scale[j] =
        var > 0.0 ? (by_variance ? var : std::sqrt(var)) : 1.0;
  }
  return stats;
}

void apply_rescale(Matrix& x, const RescaleStats& stats) {
  if (x.cols() != stats.mean.size() || x.cols() != stats.scale.size())
    throw std::invalid_argument("apply_rescale: column count mismatch");
  x = (x.rowwise() - stats.mean.transpose()).array().rowwise() /
      stats.scale.transpose().array();
}

void rescale_columns(Dataset& data, bool by_variance) {
  data.stats = compute_rescale(data.x, by_variance);
  apply_rescale(data.x, data.stats);
  data.rescaled = true;
}

std::pair<Dataset, Dataset> split(const Dataset& data, double train_frac,
                                  std::uint64_t seed) {
  const auto n = static_cast<int>(data.x.rows());
  if (n != data.y.size())
    throw std::invalid_argument("split: x and y disagree on sample count");
  const int n_train = static_cast<int>(std::floor(train_frac * n));
  if (n_train < 1 || n_train >= n)
    throw std::invalid_argument("split: train_frac leaves one side empty");

  Rng rng(seed);
  std::vector<int> idx = shuffled_indices(rng, n);
  std::vector<int> train_idx(idx.begin(), idx.begin() + n_train);
  std::vector<int> test_idx(idx.begin() + n_train, idx.end());
  std::sort(train_idx.begin(), train_idx.end());
  std::sort(test_idx.begin(), test_idx.end());

  const auto take = [&](const std::vector<int>& rows, const char* tag) {
    Dataset side;
    side.x.resize(static_cast<Eigen::Index>(rows.size()), data.x.cols());
    side.y.resize(static_cast<Eigen::Index>(rows.size()));
    for (std::size_t i = 0; i < rows.size(); ++i) {
      side.x.row(static_cast<Eigen::Index>(i)) = data.x.row(rows[i]);
      side.y[static_cast<Eigen::Index>(i)] = data.y[rows[i]];
    }
    side.provenance = data.provenance + " [" + tag + "]";
    side.normalized = data.normalized;
    side.rescaled = data.rescaled;
    side.stats = data.stats;
    return side;
  };
  return {take(train_idx, "train"), take(test_idx, "test")};
}

}  // namespace ntkgp
