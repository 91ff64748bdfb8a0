// Batch experiment runner: kernel evaluation, bias/length-scale matching,
// posterior-mean matching on synthetic data, real-data fitting, the
// finite-width oracle, and dataset generation. Every subcommand is
// deterministic under --seed; artifacts land under --out.
//
// Exit codes: 0 success, 2 usage/config error, 1 runtime failure.

#include <CLI11.hpp>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include <ntkgp/datagen.hpp>
#include <ntkgp/dataio.hpp>
#include <ntkgp/finite_net.hpp>
#include <ntkgp/gp.hpp>
#include <ntkgp/kernels.hpp>
#include <ntkgp/matching.hpp>
#include <ntkgp/rng.hpp>

namespace {

using namespace ntkgp;

// ---------------------------------------------------------------------------
// shared plumbing

struct CommonOpts {
  std::uint64_t seed = 0;
  std::string out = ".";
  bool timing = false;  // off by default so record bytes are seed-stable
};

void add_common(CLI::App* sub, CommonOpts& common) {
  sub->add_option("--seed", common.seed, "RNG seed (default 0)");
  sub->add_option("--out", common.out, "directory for output artifacts");
  sub->add_flag("--timing", common.timing,
                "store wall time in records (breaks byte determinism)");
  // lets the root-level --config (and nothing else) be typed after the
  // subcommand name; config files are processed by the root app only
  sub->fallthrough(true);
}

class Stopwatch {
 public:
  [[nodiscard]] double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                         start_)
        .count();
  }

 private:
  std::chrono::steady_clock::time_point start_ =
      std::chrono::steady_clock::now();
};

std::string fmt(double value) {
  char buffer[40];
  std::snprintf(buffer, sizeof buffer, "%.17g", value);
  return buffer;
}

// Flat replayable key=value line; keys are the subcommand's option names.
class ConfigLine {
 public:
  ConfigLine& add(const std::string& key, const std::string& value) {
    if (!text_.empty()) text_ += ' ';
    text_ += key + '=' + value;
    return *this;
  }
  ConfigLine& add(const std::string& key, double value) {
    return add(key, fmt(value));
  }
  ConfigLine& add(const std::string& key, int value) {
    return add(key, std::to_string(value));
  }
  ConfigLine& add(const std::string& key, std::uint64_t value) {
    return add(key, std::to_string(value));
  }
  ConfigLine& add(const std::string& key, bool value) {
    return add(key, std::string(value ? "true" : "false"));
  }
  [[nodiscard]] const std::string& str() const { return text_; }

 private:
  std::string text_;
};

std::string out_path(const CommonOpts& common, const std::string& name) {
  std::filesystem::create_directories(common.out);
  return (std::filesystem::path(common.out) / name).string();
}

void save_record(const CommonOpts& common, ExperimentRecord record,
                 const Stopwatch& watch, const std::string& name) {
  record.seed = common.seed;
  record.elapsed_seconds = common.timing ? watch.seconds() : 0.0;
  write_record(out_path(common, name), record);
}

// ---------------------------------------------------------------------------
// dataset dispatch shared by `posterior-match` and `generate`

struct DatasetChoice {
  std::string name = "parametric";
  int n = 0;  // 0 = the experiment's own sample count
  bool noisy = true;
  double noise_sd = 0.15;  // parametric only
};

bool is_surface(const std::string& name) {
  return name == "ackley" || name == "franke" || name == "nonpoly";
}

Surface surface_from(const std::string& name) {
  if (name == "ackley") return Surface::kAckley;
  if (name == "franke") return Surface::kFranke;
  return Surface::kNonpoly;
}

int default_samples(const std::string& name) {
  if (name == "parametric") return 100;  // 50/50 split
  if (is_surface(name)) return 1000;     // 500/500
  return 200;                            // friedman: 100/100
}

Dataset make_dataset(const DatasetChoice& choice, std::uint64_t seed) {
  const int n = choice.n > 0 ? choice.n : default_samples(choice.name);
  if (choice.name == "parametric")
    return gen_parametric(n, seed, choice.noisy ? choice.noise_sd : 0.0);
  if (is_surface(choice.name))
    return gen_surface(surface_from(choice.name), n, seed, choice.noisy);
  if (choice.name == "friedman1") return gen_friedman(1, n, seed, choice.noisy);
  if (choice.name == "friedman2") return gen_friedman(2, n, seed, choice.noisy);
  if (choice.name == "friedman3") return gen_friedman(3, n, seed, choice.noisy);
  throw CLI::ValidationError("--dataset", "unknown dataset " + choice.name);
}

const std::vector<std::string> kDatasetNames{
    "parametric", "ackley",    "franke",   "nonpoly",
    "friedman1",  "friedman2", "friedman3"};

// ---------------------------------------------------------------------------
// eval

struct EvalOpts {
  CommonOpts common;
  std::string kernel = "ntk";
  int depth = 3;
  double beta = 0.0;
  double ell = 1.0;
  double constant = 1.0;
  std::vector<double> x;
  std::vector<double> z;
  bool raw = false;
  bool grad_beta = false;
  bool shallow = false;
};

Vector to_vector(const std::vector<double>& values) {
  Vector v(static_cast<Eigen::Index>(values.size()));
  for (std::size_t i = 0; i < values.size(); ++i)
    v[static_cast<Eigen::Index>(i)] = values[i];
  return v;
}

int run_eval(const EvalOpts& opt) {
  const Vector x = to_vector(opt.x);
  const Vector z = to_vector(opt.z);
  double value = 0.0;
  if (opt.shallow) {
    value = ntk_shallow_limit(x, z);
  } else if (opt.grad_beta) {
    value = ntk_beta_grad(x, z, NtkParams{opt.depth, opt.beta, 1.0, 0.0});
  } else if (opt.raw) {
    value = ntk_eval(x, z, NtkParams{opt.depth, opt.beta, 1.0, 0.0});
  } else {
    KernelSpec spec = opt.kernel == "ntk"       ? KernelSpec::ntk(opt.depth, opt.beta)
                      : opt.kernel == "laplace" ? KernelSpec::laplace(opt.ell)
                                                : KernelSpec::gaussian(opt.ell);
    spec.constant = opt.constant;
    value = kernel_value(spec, x, z);
  }
  std::cout << fmt(value) << '\n';
  return 0;
}

void setup_eval(CLI::App& app, EvalOpts& opt) {
  CLI::App* sub = app.add_subcommand(
      "eval", "evaluate one kernel (or NTK gradient / shallow limit)");
  sub->add_option("--kernel", opt.kernel, "ntk, laplace, or gaussian")
      ->check(CLI::IsMember({"ntk", "laplace", "gaussian"}));
  sub->add_option("--depth", opt.depth, "NTK hidden layers")
      ->check(CLI::NonNegativeNumber);
  sub->add_option("--beta", opt.beta, "NTK bias scale")
      ->check(CLI::NonNegativeNumber);
  sub->add_option("--ell", opt.ell, "Matérn length scale")
      ->check(CLI::PositiveNumber);
  sub->add_option("--constant", opt.constant, "multiplicative scale c")
      ->check(CLI::PositiveNumber);
  sub->add_option("--x", opt.x, "first input vector")->required()->expected(-1);
  sub->add_option("--z", opt.z, "second input vector")
      ->required()
      ->expected(-1);
  CLI::Option* raw =
      sub->add_flag("--raw", opt.raw, "unnormalized NTK instead of k-ddot");
  CLI::Option* grad = sub->add_flag("--grad-beta", opt.grad_beta,
                                    "d/d(beta) of the normalized NTK");
  CLI::Option* shallow = sub->add_flag("--shallow-limit", opt.shallow,
                                       "large-beta one-hidden-layer limit");
  raw->excludes(grad)->excludes(shallow);
  grad->excludes(shallow);
  add_common(sub, opt.common);
  sub->callback([&opt] { run_eval(opt); });
}

// ---------------------------------------------------------------------------
// match-kernels

struct MatchOpts {
  CommonOpts common;
  int depth = 3;
  int dim = 100;
  int n = 1000;
  int grid = 201;
  double beta_max = 0.0;
  std::string sampler = "positive";
};

int run_match(const MatchOpts& opt) {
  const Stopwatch watch;
  Algorithm1Options options;
  options.dim = opt.dim;
  options.grid_size = opt.grid;
  options.beta_max = opt.beta_max;
  options.sampler = opt.sampler == "gaussian" ? SphereSampler::kGaussian
                                              : SphereSampler::kPositiveUniform;
  options.seed = opt.common.seed;

  std::vector<BetaGridPoint> curve;
  const MatchReport report =
      match_bias_lengthscale(opt.depth, opt.n, options, &curve);

  Matrix table(static_cast<Eigen::Index>(curve.size()), 3);
  for (std::size_t i = 0; i < curve.size(); ++i)
    table.row(static_cast<Eigen::Index>(i)) << curve[i].beta,
        curve[i].ell_mean, curve[i].ell_var;
  const std::string tag = "D" + std::to_string(opt.depth);
  const std::string curve_name = "match_curve_" + tag + ".csv";
  write_table(out_path(opt.common, curve_name),
              {"beta", "ell_mean", "ell_var"}, table);

  ExperimentRecord record;
  record.experiment = "match-kernels";
  record.config = ConfigLine()
                      .add("depth", opt.depth)
                      .add("dim", opt.dim)
                      .add("n", opt.n)
                      .add("grid", opt.grid)
                      .add("beta-max", opt.beta_max)
                      .add("sampler", opt.sampler)
                      .add("seed", opt.common.seed)
                      .str();
  record.hypers = {{"beta", report.beta}, {"ell", report.length_scale}};
  record.metrics = {{"variance", report.variance},
                    {"flagged", report.flagged ? 1.0 : 0.0}};
  record.artifacts = {curve_name};
  save_record(opt.common, record, watch, "match_kernels_" + tag + ".json");

  std::cout << "depth=" << opt.depth << " beta=" << report.beta
            << " ell=" << report.length_scale
            << " var=" << report.variance;
  if (report.flagged) std::cout << "  [" << report.note << "]";
  std::cout << "  (" << watch.seconds() << "s)\n";
  return 0;
}

void setup_match(CLI::App& app, MatchOpts& opt) {
  CLI::App* sub = app.add_subcommand(
      "match-kernels",
      "variance-minimizing bias/length-scale grid search (kernel matching)");
  sub->add_option("--depth", opt.depth, "NTK hidden layers")
      ->check(CLI::NonNegativeNumber);
  sub->add_option("--dim", opt.dim, "ambient dimension of the sphere pairs")
      ->check(CLI::PositiveNumber);
  sub->add_option("--n", opt.n, "sample pairs per grid cell")
      ->check(CLI::PositiveNumber);
  sub->add_option("--grid", opt.grid, "number of beta cells")
      ->check(CLI::PositiveNumber);
  sub->add_option("--beta-max", opt.beta_max,
                  "top of the beta grid (0 = per-depth default)");
  sub->add_option("--sampler", opt.sampler,
                  "positive (orthant, default) or gaussian (full sphere)")
      ->check(CLI::IsMember({"positive", "gaussian"}));
  add_common(sub, opt.common);
  sub->callback([&opt] { run_match(opt); });
}

// ---------------------------------------------------------------------------
// posterior-match

struct PosteriorOpts {
  CommonOpts common;
  DatasetChoice data;
  std::vector<int> depths{2, 3, 10};
  bool normalize = false;
  bool x_rescale = false;
  bool y_rescale = true;
  double train_frac = 0.5;
  int n_restart = 9;
  int max_iter = 200;
  double alpha = 1e-5;
};

FitOptions fit_options_for(const PosteriorOpts& opt, std::uint64_t stream) {
  FitOptions options;
  options.n_restart = opt.n_restart;
  options.y_rescale = opt.y_rescale;
  options.alpha = opt.alpha;
  options.max_iter = opt.max_iter;
  options.seed = mix_seed(opt.common.seed, stream);
  return options;
}

KernelSpec ntk_spec_for_fit(int depth, bool noisy) {
  KernelSpec spec = KernelSpec::ntk(depth, 1.0);
  spec.constant_bounds.fixed = false;
  if (noisy) {
    spec.noise = 0.1;
    spec.noise_on = true;
    spec.noise_bounds.fixed = false;
  }
  return spec;
}

int run_posterior(const PosteriorOpts& opt) {
  Dataset data = make_dataset(opt.data, opt.common.seed);
  if (opt.x_rescale) rescale_columns(data);
  if (opt.normalize) normalize_to_sphere(data);
  const auto [train, test] = split(data, opt.train_frac, opt.common.seed);

  const ConfigLine base_config = ConfigLine()
                                     .add("dataset", opt.data.name)
                                     .add("n-samples", opt.data.n)
                                     .add("noise", opt.data.noisy)
                                     .add("noise-sd", opt.data.noise_sd)
                                     .add("normalize", opt.normalize)
                                     .add("x-rescale", opt.x_rescale)
                                     .add("y-rescale", opt.y_rescale)
                                     .add("train-frac", opt.train_frac)
                                     .add("n-restart", opt.n_restart)
                                     .add("max-iter", opt.max_iter)
                                     .add("alpha", opt.alpha)
                                     .add("seed", opt.common.seed);

  int cells_ok = 0;
  for (std::size_t cell = 0; cell < opt.depths.size(); ++cell) {
    const int depth = opt.depths[cell];
    const Stopwatch watch;
    const std::string tag = opt.data.name + "_D" + std::to_string(depth);
    try {
      const FitOptions options = fit_options_for(opt, cell);
      const GpModel model =
          fit(train.x, train.y, ntk_spec_for_fit(depth, opt.data.noisy),
              options);
      const Vector pred = predict_mean(model, test.x);
      const MatchReport laplace =
          posterior_match(model, KernelFamily::kLaplace, test.x, options);
      const MatchReport gauss =
          posterior_match(model, KernelFamily::kGaussian, test.x, options);

      // posterior table: inputs, ground truth, the three posterior means
      const auto dim = test.x.cols();
      Matrix table(test.x.rows(), dim + 4);
      table.leftCols(dim) = test.x;
      table.col(dim) = test.y;
      table.col(dim + 1) = pred;
      {
        KernelSpec lap_spec = KernelSpec::laplace(laplace.length_scale);
        lap_spec.length_bounds.fixed = true;
        lap_spec.constant = model.kernel.constant;
        lap_spec.noise = model.kernel.noise;
        lap_spec.noise_on = model.kernel.noise_on;
        table.col(dim + 2) =
            predict_mean(fit(train.x, train.y, lap_spec, options), test.x);
        KernelSpec gau_spec = KernelSpec::gaussian(gauss.length_scale);
        gau_spec.length_bounds.fixed = true;
        gau_spec.constant = model.kernel.constant;
        gau_spec.noise = model.kernel.noise;
        gau_spec.noise_on = model.kernel.noise_on;
        table.col(dim + 3) =
            predict_mean(fit(train.x, train.y, gau_spec, options), test.x);
      }
      std::vector<std::string> columns;
      for (Eigen::Index j = 0; j < dim; ++j)
        columns.push_back("x" + std::to_string(j + 1));
      columns.insert(columns.end(), {"truth", "ntk", "laplace", "gaussian"});
      const std::string table_name = "posterior_means_" + tag + ".csv";
      write_table(out_path(opt.common, table_name), columns, table);

      ExperimentRecord record;
      record.experiment = "posterior-match";
      record.config = ConfigLine(base_config).add("depth", depth).str();
      record.hypers = {{"beta", model.kernel.beta},
                       {"constant", model.kernel.constant},
                       {"ell_laplace", laplace.length_scale},
                       {"ell_gaussian", gauss.length_scale}};
      if (model.kernel.noise_on)
        record.hypers["sigma2"] = model.kernel.noise;
      record.metrics = {{"ntk_rmse", rmse(pred, test.y)},
                        {"ntk_r2", r_squared(test.y, pred)},
                        {"ntk_rho", pearson(test.y, pred)},
                        {"ntk_mll", model.mll},
                        {"laplace_rmse", laplace.rmse},
                        {"laplace_rho", laplace.pearson_rho},
                        {"gaussian_rmse", gauss.rmse},
                        {"gaussian_rho", gauss.pearson_rho}};
      record.artifacts = {table_name};
      save_record(opt.common, record, watch, "posterior_" + tag + ".json");

      std::cout << tag << ": ntk_r2=" << record.metrics["ntk_r2"]
                << " laplace_rho=" << laplace.pearson_rho
                << " gaussian_rho=" << gauss.pearson_rho << "  ("
                << watch.seconds() << "s)\n";
      ++cells_ok;
    } catch (const std::exception& err) {
      std::cerr << tag << ": cell failed: " << err.what() << '\n';
    }
  }
  if (cells_ok == 0)
    throw std::runtime_error("posterior-match: every depth cell failed");
  return 0;
}

void setup_posterior(CLI::App& app, PosteriorOpts& opt) {
  CLI::App* sub = app.add_subcommand(
      "posterior-match",
      "fit an NTK GP on generated data and match Matérn posteriors to it");
  sub->add_option("--dataset", opt.data.name, "generator name")
      ->required()
      ->check(CLI::IsMember(kDatasetNames));
  sub->add_option("--n-samples", opt.data.n,
                  "total samples before the split (0 = experiment default)");
  sub->add_flag("--noise,!--no-noise", opt.data.noisy,
                "add generator noise and a white-noise hyperparameter");
  sub->add_option("--noise-sd", opt.data.noise_sd,
                  "parametric curve noise level");
  sub->add_option("--depth", opt.depths, "NTK depths to sweep")
      ->expected(-1);
  sub->add_flag("--normalize", opt.normalize, "project inputs to the sphere");
  sub->add_flag("--x-rescale", opt.x_rescale,
                "center columns and divide by variance before any normalize");
  sub->add_flag("--y-rescale,!--no-y-rescale", opt.y_rescale,
                "standardize the response during training");
  sub->add_option("--train-frac", opt.train_frac, "training fraction");
  sub->add_option("--n-restart", opt.n_restart, "optimizer restarts")
      ->check(CLI::NonNegativeNumber);
  sub->add_option("--max-iter", opt.max_iter, "optimizer iteration cap")
      ->check(CLI::PositiveNumber);
  sub->add_option("--alpha", opt.alpha, "jitter for positive definiteness")
      ->check(CLI::PositiveNumber);
  add_common(sub, opt.common);
  sub->callback([&opt] { run_posterior(opt); });
}

// ---------------------------------------------------------------------------
// fit-real

struct FitRealOpts {
  CommonOpts common;
  std::string dataset;
  std::string path;
  bool sphere = false;
  std::vector<int> depths{2, 3, 10};
  bool y_rescale = true;
  int n_restart = 9;
  int max_iter = 200;
  double alpha = 1e-5;
};

struct RealCell {
  std::string label;   // e.g. "ntk_D2", "laplace"
  KernelSpec spec;
};

int run_fit_real(const FitRealOpts& opt) {
  Dataset data =
      opt.dataset == "concrete" ? load_concrete(opt.path) : load_fire(opt.path);
  rescale_columns(data);  // input rescaling is always on for real data
  if (opt.sphere) normalize_to_sphere(data);
  const auto [train, test] = split(data, 0.75, opt.common.seed);
  const bool log_scale = opt.dataset == "fire";  // undo log(area+1) for metrics

  std::vector<RealCell> cells;
  for (int depth : opt.depths)
    cells.push_back({"ntk_D" + std::to_string(depth),
                     ntk_spec_for_fit(depth, /*noisy=*/true)});
  for (const char* name : {"laplace", "gaussian"}) {
    KernelSpec spec = std::string(name) == "laplace" ? KernelSpec::laplace(1.0)
                                                     : KernelSpec::gaussian(1.0);
    spec.constant_bounds.fixed = false;
    spec.noise = 0.1;
    spec.noise_on = true;
    spec.noise_bounds.fixed = false;
    cells.push_back({name, spec});
  }

  const ConfigLine base_config = ConfigLine()
                                     .add("dataset", opt.dataset)
                                     .add("path", opt.path)
                                     .add("sphere", opt.sphere)
                                     .add("y-rescale", opt.y_rescale)
                                     .add("n-restart", opt.n_restart)
                                     .add("max-iter", opt.max_iter)
                                     .add("alpha", opt.alpha)
                                     .add("seed", opt.common.seed);

  int cells_ok = 0;
  for (std::size_t cell = 0; cell < cells.size(); ++cell) {
    const Stopwatch watch;
    const std::string tag = opt.dataset + "_" + cells[cell].label;
    try {
      FitOptions options;
      options.n_restart = opt.n_restart;
      options.y_rescale = opt.y_rescale;
      options.alpha = opt.alpha;
      options.max_iter = opt.max_iter;
      options.seed = mix_seed(opt.common.seed, 100 + cell);

      const GpModel model = fit(train.x, train.y, cells[cell].spec, options);
      Vector pred = predict_mean(model, test.x);
      Vector truth = test.y;
      if (log_scale) {  // back to burned-area units
        pred = pred.array().expm1();
        truth = truth.array().expm1();
      }

      Matrix table(truth.size(), 2);
      table.col(0) = truth;
      table.col(1) = pred;
      const std::string table_name = "fit_real_" + tag + ".csv";
      write_table(out_path(opt.common, table_name), {"truth", "prediction"},
                  table);

      // config stays replayable: NTK cells pin their depth, Matérn cells
      // replay as part of the default sweep
      ExperimentRecord record;
      record.experiment = "fit-real";
      record.config =
          cells[cell].spec.family == KernelFamily::kNtk
              ? ConfigLine(base_config).add("depth", cells[cell].spec.depth).str()
              : base_config.str();
      record.hypers = {{"constant", model.kernel.constant},
                       {"sigma2", model.kernel.noise}};
      if (model.kernel.family == KernelFamily::kNtk)
        record.hypers["beta"] = model.kernel.beta;
      else
        record.hypers["ell"] = model.kernel.length_scale;
      record.metrics = {{"rmse", rmse(truth, pred)},
                        {"r2", r_squared(truth, pred)},
                        {"mll", model.mll}};
      record.artifacts = {table_name};
      save_record(opt.common, record, watch, "fit_real_" + tag + ".json");

      std::cout << tag << ": rmse=" << record.metrics["rmse"]
                << " r2=" << record.metrics["r2"] << "  (" << watch.seconds()
                << "s)\n";
      ++cells_ok;
    } catch (const std::exception& err) {
      std::cerr << tag << ": cell failed: " << err.what() << '\n';
    }
  }
  if (cells_ok == 0)
    throw std::runtime_error("fit-real: every kernel cell failed");
  return 0;
}

void setup_fit_real(CLI::App& app, FitRealOpts& opt) {
  CLI::App* sub = app.add_subcommand(
      "fit-real", "fit NTK/Laplace/Gaussian GPs to a real dataset");
  sub->add_option("--dataset", opt.dataset, "concrete or fire")
      ->required()
      ->check(CLI::IsMember({"concrete", "fire"}));
  sub->add_option("--path", opt.path, "CSV file location")->required();
  sub->add_flag("--sphere", opt.sphere,
                "normalize rescaled inputs onto the unit sphere");
  sub->add_option("--depth", opt.depths, "NTK depths to sweep")->expected(-1);
  sub->add_flag("--y-rescale,!--no-y-rescale", opt.y_rescale,
                "standardize the response during training");
  sub->add_option("--n-restart", opt.n_restart, "optimizer restarts")
      ->check(CLI::NonNegativeNumber);
  sub->add_option("--max-iter", opt.max_iter, "optimizer iteration cap")
      ->check(CLI::PositiveNumber);
  sub->add_option("--alpha", opt.alpha, "jitter for positive definiteness")
      ->check(CLI::PositiveNumber);
  add_common(sub, opt.common);
  sub->callback([&opt] { run_fit_real(opt); });
}

// ---------------------------------------------------------------------------
// oracle

struct OracleOpts {
  CommonOpts common;
  int depth = 2;
  int width = 1000;
  int samples = 10;
  double beta = 0.0;
  int dim = 3;
  std::vector<double> x;
  std::vector<double> z;
};

int run_oracle(const OracleOpts& opt) {
  Vector x, z;
  if (!opt.x.empty() || !opt.z.empty()) {
    x = to_vector(opt.x);
    z = to_vector(opt.z);
  } else {  // a seeded positive-orthant sphere pair
    Rng rng(opt.common.seed);
    x.resize(opt.dim);
    z.resize(opt.dim);
    for (int i = 0; i < opt.dim; ++i) x[i] = uniform01(rng);
    for (int i = 0; i < opt.dim; ++i) z[i] = uniform01(rng);
    x.normalize();
    z.normalize();
  }

  FiniteNetConfig config;
  config.depth = opt.depth;
  config.width = opt.width;
  config.beta = opt.beta;
  config.samples = opt.samples;
  config.seed = opt.common.seed;
  const NtkEstimate estimate = empirical_ntk(x, z, config);
  const double analytic =
      ntk_eval(x, z, NtkParams{opt.depth, opt.beta, 1.0, 0.0});
  const double z_score =
      estimate.std_error > 0.0
          ? (estimate.mean - analytic) / estimate.std_error
          : (estimate.mean == analytic
                 ? 0.0
                 : std::numeric_limits<double>::infinity());

  std::cout << "empirical = " << fmt(estimate.mean) << " +/- "
            << fmt(estimate.std_error) << '\n'
            << "analytic  = " << fmt(analytic) << '\n'
            << "z-score   = " << fmt(z_score) << '\n';
  return 0;
}

void setup_oracle(CLI::App& app, OracleOpts& opt) {
  CLI::App* sub = app.add_subcommand(
      "oracle",
      "Monte-Carlo NTK of a finite ReLU network vs the analytic recursion");
  sub->add_option("--depth", opt.depth, "hidden layers")
      ->check(CLI::NonNegativeNumber);
  sub->add_option("--width", opt.width, "hidden width")
      ->check(CLI::PositiveNumber);
  sub->add_option("--samples", opt.samples, "weight replicates")
      ->check(CLI::PositiveNumber);
  sub->add_option("--beta", opt.beta, "bias scale")
      ->check(CLI::NonNegativeNumber);
  sub->add_option("--dim", opt.dim, "input dimension for the sampled pair")
      ->check(CLI::PositiveNumber);
  sub->add_option("--x", opt.x, "explicit first input")->expected(-1);
  sub->add_option("--z", opt.z, "explicit second input")->expected(-1);
  add_common(sub, opt.common);
  sub->callback([&opt] { run_oracle(opt); });
}

// ---------------------------------------------------------------------------
// generate

struct GenerateOpts {
  CommonOpts common;
  DatasetChoice data;
  bool normalize = false;
  bool x_rescale = false;
};

int run_generate(const GenerateOpts& opt) {
  const Stopwatch watch;
  Dataset data = make_dataset(opt.data, opt.common.seed);
  if (opt.x_rescale) rescale_columns(data);
  if (opt.normalize) normalize_to_sphere(data);

  Matrix table(data.x.rows(), data.x.cols() + 1);
  table.leftCols(data.x.cols()) = data.x;
  table.col(data.x.cols()) = data.y;
  std::vector<std::string> columns;
  for (Eigen::Index j = 0; j < data.x.cols(); ++j)
    columns.push_back("x" + std::to_string(j + 1));
  columns.push_back("y");

  const std::string table_name = opt.data.name + "_n" +
                                 std::to_string(data.x.rows()) + "_seed" +
                                 std::to_string(opt.common.seed) + ".csv";
  write_table(out_path(opt.common, table_name), columns, table);

  ExperimentRecord record;
  record.experiment = "generate";
  record.config = ConfigLine()
                      .add("dataset", opt.data.name)
                      .add("n-samples", opt.data.n)
                      .add("noise", opt.data.noisy)
                      .add("noise-sd", opt.data.noise_sd)
                      .add("x-rescale", opt.x_rescale)
                      .add("normalize", opt.normalize)
                      .add("seed", opt.common.seed)
                      .str();
  record.metrics = {{"n", static_cast<double>(data.x.rows())},
                    {"dim", static_cast<double>(data.x.cols())}};
  record.artifacts = {table_name};
  save_record(opt.common, record, watch,
              "generate_" + opt.data.name + ".json");

  std::cout << data.provenance << " -> " << table_name << '\n';
  return 0;
}

void setup_generate(CLI::App& app, GenerateOpts& opt) {
  CLI::App* sub =
      app.add_subcommand("generate", "write one synthetic dataset as CSV");
  sub->add_option("--dataset", opt.data.name, "generator name")
      ->required()
      ->check(CLI::IsMember(kDatasetNames));
  sub->add_option("--n-samples", opt.data.n,
                  "sample count (0 = experiment default)");
  sub->add_flag("--noise,!--no-noise", opt.data.noisy, "add generator noise");
  sub->add_option("--noise-sd", opt.data.noise_sd,
                  "parametric curve noise level");
  sub->add_flag("--x-rescale", opt.x_rescale,
                "center columns and divide by variance");
  sub->add_flag("--normalize", opt.normalize, "project inputs to the sphere");
  add_common(sub, opt.common);
  sub->callback([&opt] { run_generate(opt); });
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "Gaussian-process regression toolkit for NTK / Matérn kernel "
      "equivalence experiments"};
  app.require_subcommand(1);
  app.set_config("--config", "",
                 "INI file of key=value options inside a [subcommand] "
                 "section (record config strings replay this way)");
  app.allow_config_extras(false);  // unknown / unsectioned keys are errors

  EvalOpts eval_opts;
  MatchOpts match_opts;
  PosteriorOpts posterior_opts;
  FitRealOpts fit_real_opts;
  OracleOpts oracle_opts;
  GenerateOpts generate_opts;
  setup_eval(app, eval_opts);
  setup_match(app, match_opts);
  setup_posterior(app, posterior_opts);
  setup_fit_real(app, fit_real_opts);
  setup_oracle(app, oracle_opts);
  setup_generate(app, generate_opts);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& err) {
    const int code = app.exit(err);
    return code == 0 ? 0 : 2;  // help/version exit clean, usage errors -> 2
  } catch (const std::logic_error& err) {  // bad configuration or inputs
    std::cerr << "error: " << err.what() << '\n';
    return 2;
  } catch (const std::exception& err) {  // conditioning, ingestion, I/O
    std::cerr << "error: " << err.what() << '\n';
    return 1;
  }
  return 0;
}
