#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>

// Seeded randomness helpers. The engine is std::mt19937_64, whose output
// sequence is pinned by the standard; the variate transforms below are written
// out explicitly (instead of using std::uniform_real_distribution /
// std::normal_distribution, whose algorithms are implementation-defined) so
// that a fixed seed produces identical streams on every toolchain.
namespace ntkgp {

using Rng = std::mt19937_64;

/// Uniform double in [0, 1) with 53 random bits.
inline double uniform01(Rng& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

/// Uniform double in [lo, hi).
inline double uniform(Rng& rng, double lo, double hi) {
  return lo + (hi - lo) * uniform01(rng);
}

/// Standard normal draw via Box-Muller (two uniforms per call, no cached
/// second variate, so the stream position is predictable).
inline double gaussian(Rng& rng) {
  double u1 = 0.0;
  do {
    u1 = uniform01(rng);
  } while (u1 <= 0.0);
  const double u2 = uniform01(rng);
  return std::sqrt(-2.0 * std::log(u1)) *
         std::cos(2.0 * std::numbers::pi_v<double> * u2);
}

/// Fills a buffer with standard normals, consuming both Box-Muller outputs per
/// uniform pair. Bulk counterpart of gaussian() for weight matrices; the
/// stream it produces differs from repeated gaussian() calls.
inline void fill_gaussian(Rng& rng, double* out, std::ptrdiff_t n) {
  constexpr double kTwoPi = 2.0 * std::numbers::pi_v<double>;
  std::ptrdiff_t i = 0;
  for (; i + 1 < n; i += 2) {
    double u1 = 0.0;
    do {
      u1 = uniform01(rng);
    } while (u1 <= 0.0);
    const double u2 = uniform01(rng);
    const double r = std::sqrt(-2.0 * std::log(u1));
    out[i] = r * std::cos(kTwoPi * u2);
    out[i + 1] = r * std::sin(kTwoPi * u2);
  }
  if (i < n) out[i] = gaussian(rng);
}

/// Derives an independent stream seed from (seed, stream index); SplitMix64
/// finalizer so neighboring indices decorrelate.
inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ull * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

}  // namespace ntkgp
