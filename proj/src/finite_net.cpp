#include <ntkgp/finite_net.hpp>

#include <cmath>
#include <stdexcept>
#include <string>

#include <ntkgp/rng.hpp>

namespace ntkgp {
namespace {

void check_config(const FiniteNetConfig& config) {
  if (config.depth < 0) throw std::invalid_argument("finite net: depth must be >= 0");
  if (config.width < 1) throw std::invalid_argument("finite net: width must be >= 1");
  if (config.samples < 1) throw std::invalid_argument("finite net: samples must be >= 1");
}

Matrix sample_gaussian(Rng& rng, Eigen::Index rows, Eigen::Index cols) {
  Matrix w(rows, cols);
  fill_gaussian(rng, w.data(), w.size());
  return w;
}

}  // namespace

std::vector<std::vector<NtkEstimate>> empirical_ntk_batch(
    const Matrix& x, const Matrix& z, const FiniteNetConfig& config,
    const std::vector<double>& betas) {
  check_config(config);
  if (x.rows() != z.rows() || x.cols() != z.cols())
    throw std::invalid_argument("finite net: x and z must have matching shapes");
  if (x.rows() < 1 || x.cols() < 1)
    throw std::invalid_argument("finite net: need at least one pair and one feature");
  if (betas.empty()) throw std::invalid_argument("finite net: empty beta list");
  for (double b : betas)
    if (!(b >= 0.0)) throw std::invalid_argument("finite net: beta must be >= 0");

  const Eigen::Index pairs = x.rows();
  const Eigen::Index dim = x.cols();
  const Eigen::Index cols = 2 * pairs;  // inputs stacked as columns [x..., z...]
  const int depth = config.depth;
  const Eigen::Index width = config.width;
  const int samples = config.samples;
  const double hidden_scale = std::sqrt(2.0 / static_cast<double>(width));

  Matrix a0(dim, cols);
  a0.leftCols(pairs) = x.transpose();
  a0.rightCols(pairs) = z.transpose();

  // vals[b][p][r]: replicate r's exact NTK for pair p at betas[b].
  std::vector<std::vector<std::vector<double>>> vals(
      betas.size(), std::vector<std::vector<double>>(
                        static_cast<std::size_t>(pairs),
                        std::vector<double>(static_cast<std::size_t>(samples))));

  std::vector<Matrix> weights(static_cast<std::size_t>(std::max(depth - 1, 0)));
  std::vector<Matrix> acts(static_cast<std::size_t>(depth));   // a^1..a^depth
  std::vector<Matrix> grads(static_cast<std::size_t>(depth));  // delta^1..delta^depth

  for (int rep = 0; rep < samples; ++rep) {
    Vector weight_term = Vector::Zero(pairs);  // sum of weight-gradient products
    Vector bias_factor = Vector::Ones(pairs);  // sum of <delta,delta> + output bias

    if (depth > 0) {
      Rng rng(mix_seed(config.seed, static_cast<std::uint64_t>(rep)));
      const Matrix w1 = sample_gaussian(rng, width, dim);

      // Forward; pre-activations are only needed as sign masks, folded into
      // acts (relu) and reused from acts > 0 during the backward pass.
      acts[0] = (w1 * a0).cwiseMax(0.0);
      for (int h = 2; h <= depth; ++h) {
        weights[static_cast<std::size_t>(h - 2)] = sample_gaussian(rng, width, width);
        acts[static_cast<std::size_t>(h - 1)] =
            (hidden_scale * (weights[static_cast<std::size_t>(h - 2)] *
                             acts[static_cast<std::size_t>(h - 2)]))
                .cwiseMax(0.0);
      }
      const Matrix w_out = sample_gaussian(rng, width, 1);

      // Backward: delta^h = df/dg^h, column per input.
      grads[static_cast<std::size_t>(depth - 1)] =
          (acts[static_cast<std::size_t>(depth - 1)].array() > 0.0)
              .select((hidden_scale * w_out).replicate(1, cols), 0.0);
      for (int h = depth - 1; h >= 1; --h) {
        const Matrix back =
            hidden_scale * (weights[static_cast<std::size_t>(h - 1)].transpose() *
                            grads[static_cast<std::size_t>(h)]);
        grads[static_cast<std::size_t>(h - 1)] =
            (acts[static_cast<std::size_t>(h - 1)].array() > 0.0).select(back, 0.0);
      }

      for (Eigen::Index p = 0; p < pairs; ++p) {
        const Eigen::Index u = p;
        const Eigen::Index v = pairs + p;
        double wsum = 0.0;
        double dsum = 0.0;
        // Layer 1 (scale 1) then hidden layers h >= 2 (scale^2 = 2/H).
        double d1 = grads[0].col(u).dot(grads[0].col(v));
        wsum += d1 * a0.col(u).dot(a0.col(v));
        dsum += d1;
        for (int h = 2; h <= depth; ++h) {
          const double dh = grads[static_cast<std::size_t>(h - 1)].col(u).dot(
              grads[static_cast<std::size_t>(h - 1)].col(v));
          wsum += hidden_scale * hidden_scale * dh *
                  acts[static_cast<std::size_t>(h - 2)].col(u).dot(
                      acts[static_cast<std::size_t>(h - 2)].col(v));
          dsum += dh;
        }
        // Output weights (scale^2 = 2/H) and output bias (delta = 1).
        wsum += hidden_scale * hidden_scale *
                acts[static_cast<std::size_t>(depth - 1)].col(u).dot(
                    acts[static_cast<std::size_t>(depth - 1)].col(v));
        weight_term[p] = wsum;
        bias_factor[p] += dsum;
      }
    } else {
      // Linear network: df/dw = x exactly, so the replicate kernel is x.z and
      // the only bias parameter is the output's.
      for (Eigen::Index p = 0; p < pairs; ++p)
        weight_term[p] = a0.col(p).dot(a0.col(pairs + p));
    }

    for (std::size_t b = 0; b < betas.size(); ++b) {
      const double b2 = betas[b] * betas[b];
      for (Eigen::Index p = 0; p < pairs; ++p) {
        const double value = weight_term[p] + b2 * bias_factor[p];
        if (!std::isfinite(value))
          throw std::runtime_error(
              "finite net: non-finite kernel value at replicate " +
              std::to_string(rep) + " (beta = " + std::to_string(betas[b]) + ")");
        vals[b][static_cast<std::size_t>(p)][static_cast<std::size_t>(rep)] = value;
      }
    }
  }

  std::vector<std::vector<NtkEstimate>> out(
      betas.size(), std::vector<NtkEstimate>(static_cast<std::size_t>(pairs)));
  for (std::size_t b = 0; b < betas.size(); ++b) {
    for (Eigen::Index p = 0; p < pairs; ++p) {
      const auto& v = vals[b][static_cast<std::size_t>(p)];
      double mean = 0.0;
      for (double t : v) mean += t;
      mean /= static_cast<double>(samples);
      double ss = 0.0;
      for (double t : v) ss += (t - mean) * (t - mean);
      const double sd = samples > 1 ? std::sqrt(ss / (samples - 1.0)) : 0.0;
      out[b][static_cast<std::size_t>(p)] = {mean, sd / std::sqrt(samples)};
    }
  }
  return out;
}

NtkEstimate empirical_ntk(VectorRef x, VectorRef z, const FiniteNetConfig& config) {
  if (x.size() != z.size())
    throw std::invalid_argument("finite net: x and z must have matching shapes");
  Matrix xs(1, x.size());
  Matrix zs(1, z.size());
  xs.row(0) = x.transpose();
  zs.row(0) = z.transpose();
  return empirical_ntk_batch(xs, zs, config, {config.beta})[0][0];
}

}  // namespace ntkgp
