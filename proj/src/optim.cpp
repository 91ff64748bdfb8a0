#include <ntkgp/optim.hpp>

#include <cmath>
#include <deque>
#include <stdexcept>
#include <utility>

namespace ntkgp {

ScalarMinResult minimize_scalar(const std::function<double(double)>& f,
                                double lo, double hi, double xtol,
                                int max_evals) {
  if (!(lo < hi)) throw std::invalid_argument("minimize_scalar: need lo < hi");
  if (!(xtol > 0.0)) throw std::invalid_argument("minimize_scalar: xtol must be > 0");
  if (max_evals < 3) throw std::invalid_argument("minimize_scalar: max_evals too small");

  // Brent's method: golden-section steps with parabolic interpolation when the
  // fit is trustworthy. x = best, w = second best, v = previous w.
  constexpr double kGolden = 0.3819660112501051;  // (3 - sqrt(5)) / 2
  double a = lo, b = hi;
  double x = a + kGolden * (b - a), w = x, v = x;
  double fx = f(x), fw = fx, fv = fx;
  int evals = 1;
  double d = 0.0, e = 0.0;  // last and second-to-last step sizes

  while (evals < max_evals) {
    const double m = 0.5 * (a + b);
    const double tol1 = xtol;
    const double tol2 = 2.0 * tol1;
    if (std::abs(x - m) <= tol2 - 0.5 * (b - a))
      return {x, fx, evals, true};

    bool golden = true;
    if (std::abs(e) > tol1) {
      // Fit a parabola through (v,fv), (w,fw), (x,fx).
      const double r = (x - w) * (fx - fv);
      double q = (x - v) * (fx - fw);
      double p = (x - v) * q - (x - w) * r;
      q = 2.0 * (q - r);
      if (q > 0.0) p = -p;
      q = std::abs(q);
      const double e_prev = e;
      e = d;
      if (std::abs(p) < std::abs(0.5 * q * e_prev) && p > q * (a - x) &&
          p < q * (b - x)) {
        d = p / q;
        const double u = x + d;
        if (u - a < tol2 || b - u < tol2) d = std::copysign(tol1, m - x);
        golden = false;
      }
    }
    if (golden) {
      e = (x < m) ? b - x : a - x;
      d = kGolden * e;
    }

    const double u = x + (std::abs(d) >= tol1 ? d : std::copysign(tol1, d));
    const double fu = f(u);
    ++evals;

    if (fu <= fx) {
      if (u < x) b = x; else a = x;
      v = w; fv = fw;
      w = x; fw = fx;
      x = u; fx = fu;
    } else {
      if (u < x) a = u; else b = u;
      if (fu <= fw || w == x) {
        v = w; fv = fw;
        w = u; fw = fu;
      } else if (fu <= fv || v == x || v == w) {
        v = u; fv = fu;
      }
    }
  }
  return {x, fx, evals, false};
}

namespace {

Vector clamp_to_box(Vector x, const Vector& lo, const Vector& hi) {
  return x.cwiseMax(lo).cwiseMin(hi);
}

/// Gradient with components pointing out of the box at active bounds zeroed;
/// its norm is the first-order stationarity measure for box constraints.
Vector projected_gradient(const Vector& x, const Vector& g, const Vector& lo,
                          const Vector& hi) {
  Vector pg = g;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    if ((x[i] <= lo[i] && g[i] > 0.0) || (x[i] >= hi[i] && g[i] < 0.0))
      pg[i] = 0.0;
  }
  return pg;
}

}  // namespace

BoxMinResult minimize_box(const ObjectiveWithGrad& fg, Vector x0,
                          const Vector& lo, const Vector& hi,
                          const BoxMinOptions& options) {
  const Eigen::Index n = x0.size();
  if (lo.size() != n || hi.size() != n)
    throw std::invalid_argument("minimize_box: bound sizes must match x0");
  for (Eigen::Index i = 0; i < n; ++i)
    if (!(lo[i] <= hi[i]))
      throw std::invalid_argument("minimize_box: need lo <= hi");
  if (options.max_iter < 1 || options.memory < 1)
    throw std::invalid_argument("minimize_box: bad options");

  Vector x = clamp_to_box(std::move(x0), lo, hi);
  Vector g(n);
  double fx = fg(x, g);

  std::deque<std::pair<Vector, Vector>> pairs;  // (s, y), newest at back

  BoxMinResult result;
  for (int iter = 0; iter < options.max_iter; ++iter) {
    const Vector pg = projected_gradient(x, g, lo, hi);
    const double pg_norm = pg.size() > 0 ? pg.cwiseAbs().maxCoeff() : 0.0;
    if (pg_norm < options.grad_tol) {
      result = {x, fx, pg_norm, iter, true};
      return result;
    }

    // Two-loop recursion for d = -H.g over the stored curvature pairs.
    Vector d = -g;
    if (!pairs.empty()) {
      std::vector<double> alpha(pairs.size());
      Vector q = g;
      for (std::size_t k = pairs.size(); k-- > 0;) {
        const auto& [s, y] = pairs[k];
        alpha[k] = s.dot(q) / s.dot(y);
        q -= alpha[k] * y;
      }
      const auto& [s_last, y_last] = pairs.back();
      q *= s_last.dot(y_last) / y_last.dot(y_last);
      for (std::size_t k = 0; k < pairs.size(); ++k) {
        const auto& [s, y] = pairs[k];
        const double beta = y.dot(q) / s.dot(y);
        q += (alpha[k] - beta) * s;
      }
      d = -q;
    }

    // Keep the direction feasible: drop components that push against an
    // active bound, and fall back to steepest feasible descent if the
    // quasi-Newton direction is not a descent direction.
    for (Eigen::Index i = 0; i < n; ++i) {
      if ((x[i] <= lo[i] && d[i] < 0.0) || (x[i] >= hi[i] && d[i] > 0.0))
        d[i] = 0.0;
    }
    if (!(d.dot(g) < -1e-12 * d.norm() * g.norm())) d = -pg;
    if (d.norm() == 0.0) {
      result = {x, fx, pg_norm, iter, true};
      return result;
    }

    double step = pairs.empty() ? std::min(1.0, 1.0 / d.cwiseAbs().maxCoeff()) : 1.0;
    Vector x_new, g_new(n);
    double f_new = fx;
    bool accepted = false;
    for (int ls = 0; ls < 50; ++ls) {
      x_new = clamp_to_box(x + step * d, lo, hi);
      const Vector dx = x_new - x;
      if (dx.norm() == 0.0) break;  // projection pinned every component
      f_new = fg(x_new, g_new);
      if (std::isfinite(f_new) && f_new <= fx + 1e-4 * g.dot(dx)) {
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) {
      // No admissible decrease along this direction; report where we stand.
      result = {x, fx, pg_norm, iter, pg_norm < options.grad_tol};
      return result;
    }

    const Vector s = x_new - x;
    const Vector y = g_new - g;
    if (s.dot(y) > 1e-10 * s.norm() * y.norm()) {
      pairs.emplace_back(s, y);
      if (pairs.size() > static_cast<std::size_t>(options.memory))
        pairs.pop_front();
    }
    x = std::move(x_new);
    g = std::move(g_new);
    fx = f_new;
  }

  const Vector pg = projected_gradient(x, g, lo, hi);
  const double pg_norm = pg.size() > 0 ? pg.cwiseAbs().maxCoeff() : 0.0;
  result = {x, fx, pg_norm, options.max_iter, pg_norm < options.grad_tol};
  return result;
}

}  // namespace ntkgp
