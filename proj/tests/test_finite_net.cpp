#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <stdexcept>

#include <ntkgp/finite_net.hpp>
#include <ntkgp/kernels.hpp>
#include <ntkgp/rng.hpp>

using namespace ntkgp;

namespace {

Vector random_unit(Rng& rng, int dim) {
  Vector v(dim);
  for (int i = 0; i < dim; ++i) v[i] = gaussian(rng);
  return v / v.norm();
}

double analytic(VectorRef x, VectorRef z, int depth, double beta) {
  return ntk_eval(x, z, {depth, beta, 1.0, 0.0});
}

}  // namespace

TEST_CASE("depth-0 network reproduces the linear kernel exactly") {
  Vector x = Vector::LinSpaced(4, 0.3, 1.2);
  Vector z = Vector::LinSpaced(4, -0.5, 0.9);
  for (double beta : {0.0, 0.8}) {
    const auto est = empirical_ntk(x, z, {0, 7, beta, 5, 123});
    // No weight dependence remains after differentiation, so every replicate
    // returns x.z + beta^2 and the spread collapses.
    CHECK(est.mean == doctest::Approx(x.dot(z) + beta * beta).epsilon(1e-14));
    CHECK(est.std_error <= 1e-14);
  }
}

TEST_CASE("depth-1 estimate converges to the analytic recursion") {
  Rng rng(7);
  const Vector x = random_unit(rng, 3);
  const Vector z = random_unit(rng, 3);
  const double beta = 0.5;
  const auto est = empirical_ntk(x, z, {1, 4000, beta, 40, 2024});
  const double truth = analytic(x, z, 1, beta);
  CHECK(std::abs(est.mean - truth) <
        std::max(4.0 * est.std_error, 0.04 * std::abs(truth)));
  CHECK(est.std_error > 0.0);
}

TEST_CASE("depth-2 diagonal matches (depth+1)(1+beta^2) on the sphere") {
  Rng rng(11);
  const Vector x = random_unit(rng, 5);
  const double beta = 0.7;
  const auto est = empirical_ntk(x, x, {2, 2000, beta, 30, 5});
  const double truth = 3.0 * (1.0 + beta * beta);
  CHECK(std::abs(est.mean - truth) < 0.04 * truth);
}

TEST_CASE("estimator is symmetric and deterministic") {
  Rng rng(3);
  const Vector x = random_unit(rng, 4);
  const Vector z = random_unit(rng, 4);
  const FiniteNetConfig cfg{2, 300, 0.3, 8, 99};
  const auto a = empirical_ntk(x, z, cfg);
  const auto b = empirical_ntk(z, x, cfg);
  const auto c = empirical_ntk(x, z, cfg);
  CHECK(a.mean == b.mean);
  CHECK(a.std_error == b.std_error);
  CHECK(a.mean == c.mean);
}

TEST_CASE("batch shares replicates with the single-pair form") {
  Rng rng(17);
  Matrix xs(3, 4);
  Matrix zs(3, 4);
  for (int i = 0; i < 3; ++i) {
    xs.row(i) = random_unit(rng, 4).transpose();
    zs.row(i) = random_unit(rng, 4).transpose();
  }
  const FiniteNetConfig cfg{2, 200, 0.0, 6, 31};
  const auto batch = empirical_ntk_batch(xs, zs, cfg, {0.0, 0.5});
  REQUIRE(batch.size() == 2);
  REQUIRE(batch[0].size() == 3);
  const auto single = empirical_ntk(xs.row(0), zs.row(0), cfg);
  CHECK(batch[0][0].mean == single.mean);
  // beta enters only through the additive bias term, so the two beta slices
  // of one batch differ by beta^2 * (a positive bias factor).
  for (int p = 0; p < 3; ++p) CHECK(batch[1][p].mean > batch[0][p].mean);
}

TEST_CASE("wider networks estimate the kernel more accurately") {
  Rng rng(23);
  const int pairs = 20;
  Matrix xs(pairs, 4);
  Matrix zs(pairs, 4);
  for (int i = 0; i < pairs; ++i) {
    xs.row(i) = random_unit(rng, 4).transpose();
    zs.row(i) = random_unit(rng, 4).transpose();
  }
  auto mean_abs_err = [&](int width) {
    FiniteNetConfig cfg{1, width, 0.2, 20, 77};
    const auto est = empirical_ntk_batch(xs, zs, cfg, {cfg.beta});
    double err = 0.0;
    for (int p = 0; p < pairs; ++p)
      err += std::abs(est[0][static_cast<std::size_t>(p)].mean -
                      analytic(xs.row(p), zs.row(p), 1, 0.2));
    return err / pairs;
  };
  CHECK(mean_abs_err(2000) < mean_abs_err(50));
}

TEST_CASE("degenerate width runs and reports its uncertainty") {
  Vector x(2), z(2);
  x << 1.0, 0.0;
  z << 0.6, 0.8;
  const auto est = empirical_ntk(x, z, {2, 1, 0.5, 10, 1});
  CHECK(std::isfinite(est.mean));
  CHECK(est.std_error >= 0.0);
}

TEST_CASE("non-finite kernel values are reported, not returned") {
  Vector x(2), z(2);
  x << 1.0, 0.0;
  z << 0.0, 1.0;
  CHECK_THROWS_AS(empirical_ntk(x, z, {1, 50, 1e200, 2, 0}),
                  const std::runtime_error&);
}

TEST_CASE("configuration and shape validation") {
  Vector x(2), z(2), w(3);
  x << 1.0, 0.0;
  z << 0.0, 1.0;
  w << 1.0, 0.0, 0.0;
  CHECK_THROWS_AS(empirical_ntk(x, z, {-1, 10, 0.0, 2, 0}),
                  const std::invalid_argument&);
  CHECK_THROWS_AS(empirical_ntk(x, z, {1, 0, 0.0, 2, 0}),
                  const std::invalid_argument&);
  CHECK_THROWS_AS(empirical_ntk(x, z, {1, 10, 0.0, 0, 0}),
                  const std::invalid_argument&);
  CHECK_THROWS_AS(empirical_ntk(x, z, {1, 10, -0.5, 2, 0}),
                  const std::invalid_argument&);
  CHECK_THROWS_AS(empirical_ntk(x, w, {1, 10, 0.0, 2, 0}),
                  const std::invalid_argument&);
  Matrix xs(1, 2), zs(1, 2);
  xs.row(0) = x.transpose();
  zs.row(0) = z.transpose();
  CHECK_THROWS_AS(empirical_ntk_batch(xs, zs, {1, 10, 0.0, 2, 0}, {}),
                  const std::invalid_argument&);
}
