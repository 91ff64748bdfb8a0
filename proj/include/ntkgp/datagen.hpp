#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include <ntkgp/kernels.hpp>

// Synthetic regression problems (parametric curve, 2-D test surfaces, the
// three Friedman benchmarks), Latin-hypercube sampling, and the two input
// transformations the experiments combine: column rescaling to (x - m)/s^2
// and row normalization onto the unit sphere.
namespace ntkgp {

/// Column transform learned from one matrix: subtract `mean`, divide `scale`.
/// `scale` is the population variance s^2 when `by_variance` is set (the
/// convention the experiments use), otherwise the standard deviation s;
/// constant columns get scale 1 so they pass through centered.
struct RescaleStats {
  Vector mean;
  Vector scale;
  bool by_variance = true;
};

struct Dataset {
  Matrix x;                ///< n x d inputs, one observation per row
  Vector y;                ///< n responses
  std::string provenance;  ///< generator, size, seed, noise — replayable
  bool normalized = false; ///< rows live on the unit sphere
  bool rescaled = false;   ///< columns were centered/scaled
  RescaleStats stats;      ///< valid when `rescaled` is set
};

enum class Surface { kAckley, kFranke, kNonpoly };

/// Ackley function restricted to two inputs.
[[nodiscard]] double ackley(double x1, double x2);
/// Franke's four-bump surface.
[[nodiscard]] double franke(double x1, double x2);
/// Smooth non-polynomial surface (30 + 5 x1 sin 5 x1)(4 + e^{-5 x2})/6 - 100/6.
[[nodiscard]] double nonpoly(double x1, double x2);

/// Friedman benchmark responses; x must have >= 5 (No. 1) or >= 4 entries.
[[nodiscard]] double friedman1(const VectorRef& x);
[[nodiscard]] double friedman2(const VectorRef& x);
[[nodiscard]] double friedman3(const VectorRef& x);

/// Per-dimension sampling box, one (lo, hi) pair per input column.
using SampleBounds = std::vector<std::pair<double, double>>;

[[nodiscard]] SampleBounds surface_bounds(Surface which);
[[nodiscard]] double surface_noise_sd(Surface which);
[[nodiscard]] double friedman_noise_sd(int which);

/// Latin hypercube: each dimension is cut into n equal strata, each stratum
/// receives exactly one point, and strata are assigned to rows by an
/// independent random permutation per dimension.
[[nodiscard]] Matrix latin_hypercube(int n, const SampleBounds& bounds,
                                     std::uint64_t seed);

/// Curve data: latent draws y ~ U[-2,2], t ~ U[-2pi,2pi] define the inputs
/// x = ((y^2+1) sin t, (y^2+1) cos t) on an annulus of radii [1,5]; the
/// regression target is y plus N(0, noise_sd^2) noise (0 disables noise).
[[nodiscard]] Dataset gen_parametric(int n, std::uint64_t seed,
                                     double noise_sd = 0.15);

/// 2-D surface data: inputs Latin-hypercube sampled over surface_bounds,
/// responses f(x) plus the surface's own noise level when `noisy`.
[[nodiscard]] Dataset gen_surface(Surface which, int n, std::uint64_t seed,
                                  bool noisy = true);

/// Friedman data (which in {1,2,3}): inputs drawn iid uniform per coordinate
/// (10 columns for No. 1 of which five are inert, 4 for Nos. 2-3), responses
/// plus the benchmark's noise level when `noisy`.
[[nodiscard]] Dataset gen_friedman(int which, int n, std::uint64_t seed,
                                   bool noisy = true);

/// L2-normalizes every row in place; a zero row is a domain error.
void normalize_rows(Matrix& x);
/// Dataset wrapper for normalize_rows; records the transformation.
void normalize_to_sphere(Dataset& data);

/// Learns the column transform of `x` (see RescaleStats).
[[nodiscard]] RescaleStats compute_rescale(const Matrix& x,
                                           bool by_variance = true);
/// Applies a previously learned transform, e.g. to held-out data.
void apply_rescale(Matrix& x, const RescaleStats& stats);
/// Learns and applies the transform to a dataset's inputs in place.
void rescale_columns(Dataset& data, bool by_variance = true);

/// Shuffles row indices (Fisher-Yates) and splits floor(train_frac * n) rows
/// into the train set, the rest into test; row order within each side is the
/// original one. Either side ending up empty is a contract error.
[[nodiscard]] std::pair<Dataset, Dataset> split(const Dataset& data,
                                                double train_frac,
                                                std::uint64_t seed);

}  // namespace ntkgp
