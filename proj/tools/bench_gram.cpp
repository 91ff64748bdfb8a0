// Times the threaded Gram builder against the single-threaded reference and
// verifies they agree bitwise (the parallel loop only splits rows, so the
// per-entry arithmetic is identical). Exit code 1 on any mismatch.
#include <chrono>
#include <cstdio>
#include <cstring>
#include <string>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "ntkgp/kernels.hpp"
#include "ntkgp/rng.hpp"

using namespace ntkgp;

namespace {

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
      .count();
}

Matrix random_inputs(int n, int dim, std::uint64_t seed) {
  Rng rng(seed);
  Matrix x(n, dim);
  fill_gaussian(rng, x.data(), x.size());
  return x;
}

}  // namespace

int main(int argc, char** argv) {
  int repeats = 3;
  std::vector<int> sizes = {200, 500, 1000};
  for (int i = 1; i < argc; ++i) {
    if (std::strcmp(argv[i], "--quick") == 0) {
      sizes = {200};
      repeats = 1;
    }
  }

#ifdef _OPENMP
  std::printf("threads: %d\n", omp_get_max_threads());
#else
  std::printf("threads: 1 (built without OpenMP)\n");
#endif

  const int dim = 10;
  KernelSpec spec = KernelSpec::ntk(3, 0.5);
  bool all_equal = true;

  std::printf("%8s %14s %14s %9s\n", "n", "serial (s)", "threaded (s)", "speedup");
  for (int n : sizes) {
    const Matrix x = random_inputs(n, dim, 42);

    double best_serial = 1e300;
    double best_threaded = 1e300;
    Matrix serial, threaded;
    for (int r = 0; r < repeats; ++r) {
      auto start = std::chrono::steady_clock::now();
      serial = gram_serial(spec, x);
      best_serial = std::min(best_serial, seconds_since(start));

      start = std::chrono::steady_clock::now();
      threaded = gram(spec, x);
      best_threaded = std::min(best_threaded, seconds_since(start));
    }

    const bool equal =
        serial.rows() == threaded.rows() && serial.cols() == threaded.cols() &&
        std::memcmp(serial.data(), threaded.data(),
                    sizeof(double) * static_cast<std::size_t>(serial.size())) == 0;
    all_equal = all_equal && equal;

    std::printf("%8d %14.4f %14.4f %8.2fx%s\n", n, best_serial, best_threaded,
                best_serial / best_threaded, equal ? "" : "  MISMATCH");
  }

  if (!all_equal) {
    std::printf("FAIL: threaded gram is not bitwise equal to the reference\n");
    return 1;
  }
  std::printf("threaded gram matches the serial reference bitwise\n");
  return 0;
}
