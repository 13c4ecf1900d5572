#include <CLI11.hpp>
#include <Eigen/Dense>
#include <cmath>
#include <fstream>
#include <iostream>
#include <random>

#include "subfit/harness.hpp"
#include "subfit/matrix_io.hpp"
#include "subfit/rng.hpp"

using namespace subfit;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 1;
constexpr int kExitDivergence = 2;
constexpr int kExitIo = 3;

struct GenArgs {
  std::string basis = "hadamard";
  int d = 64;
  int m = 20;
  double sigma = 0.5;
  int n = 32;
  int nsup = 0;
  std::uint64_t seed = 1;
  std::string out;
};

struct FitArgs {
  std::string alpha = "0";
  int nsup = 0;
  int p = 0;
  int k = 0;
  std::string data;
  std::uint64_t order_seed = 1;
  std::string report;
};

struct SweepArgs {
  std::string config;
  std::string out_csv;
  std::string out_plot;
};

GroundTruthModel load_model(const std::string& prefix, double sigma) {
  return GroundTruthModel(load_matrix(prefix + ".basis.txt"), sigma);
}

std::map<std::string, std::string> load_meta(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw io_error("cannot open meta file: " + path);
  std::map<std::string, std::string> meta;
  std::string line;
  while (std::getline(in, line)) {
    const auto eq = line.find('=');
    if (eq == std::string::npos) continue;
    const auto trim = [](std::string s) {
      const auto b = s.find_first_not_of(" \t\r");
      const auto e = s.find_last_not_of(" \t\r");
      return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
    };
    meta[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
  }
  return meta;
}

void run_gen(const GenArgs& args) {
  Eigen::MatrixXd basis;
  if (args.basis == "hadamard") {
    basis = make_hadamard_basis(args.d, args.m);
  } else if (args.basis == "random") {
    basis = make_random_basis(args.d, args.m, mix_seed(args.seed, 0));
  } else {
    throw config_error("basis must be hadamard or random, got '" + args.basis + "'");
  }
  const GroundTruthModel model(basis, args.sigma);
  const Dataset data = sample_dataset(model, args.n, args.nsup, mix_seed(args.seed, 1));

  save_matrix(args.out + ".basis.txt", model.basis);
  save_matrix(args.out + ".x.txt", data.x);
  save_matrix(args.out + ".z.txt", *data.z);
  save_matrix(args.out + ".mean.txt", data.sample_mean);
  std::ofstream meta(args.out + ".meta.txt");
  if (!meta) throw io_error("cannot open for writing: " + args.out + ".meta.txt");
  meta << "basis = " << args.basis << "\n"
       << "d = " << args.d << "\nm = " << args.m << "\n"
       << "sigma = " << format_double(args.sigma) << "\n"
       << "n = " << args.n << "\nnsup = " << args.nsup << "\n"
       << "seed = " << args.seed << "\n";
  if (!meta) throw io_error("write failed: " + args.out + ".meta.txt");
  std::cout << "wrote " << args.out << ".{meta,basis,x,z,mean}.txt\n";
}

void run_fit(const FitArgs& args) {
  const auto meta = load_meta(args.data + ".meta.txt");
  const double sigma = std::stod(meta.at("sigma"));
  const GroundTruthModel model = load_model(args.data, sigma);

  Dataset data;
  data.x = load_matrix(args.data + ".x.txt");
  data.z = load_matrix(args.data + ".z.txt");
  data.sample_mean = load_matrix(args.data + ".mean.txt");
  data.n_sup = args.nsup;

  const int d = model.ambient_dim();
  if (args.p < 1 || args.p > d) throw config_error("need 1 <= p <= d");
  if (args.nsup < 0 || args.nsup > data.num_samples())
    throw config_error("need 0 <= nsup <= n");
  const double alpha = args.alpha == "inf"
                           ? std::numeric_limits<double>::infinity()
                           : std::stod(args.alpha);
  const int k = args.k > 0 ? args.k : model.latent_dim();

  const auto order = grow_feature_orders(d, 1, args.order_seed)[0];
  const FeatureSet s = FeatureSet::prefix(order, args.p, d);
  const SweepRecord rec =
      evaluate_cell(model, data, s, PlanePoint{alpha, args.nsup}, k, PgdOptions{},
                    EOutSource::analytic_trace, 1000, mix_seed(args.order_seed, 3),
                    mix_seed(args.order_seed, 4));

  std::ostringstream report;
  report << "alpha = " << args.alpha << "\nnsup = " << args.nsup
         << "\np = " << args.p << "\nk = " << rec.k << "\n";
  if (std::isfinite(rec.e_in)) report << "e_in = " << format_double(rec.e_in) << "\n";
  if (std::isfinite(rec.e_in_s))
    report << "e_in_S = " << format_double(rec.e_in_s) << "\n";
  if (std::isfinite(rec.e_out)) {
    report << "e_out = " << format_double(rec.e_out) << "\n"
           << "e_out_source = " << to_string(rec.e_out_source) << "\n";
  }
  report << "iterations = " << rec.iterations << "\n";
  if (args.report.empty()) {
    std::cout << report.str();
  } else {
    std::ofstream out(args.report);
    if (!out) throw io_error("cannot open for writing: " + args.report);
    out << report.str();
  }
}

void run_sweep_cmd(const SweepArgs& args) {
  const SweepConfig config = parse_config_file(args.config);
  const SweepResult result = run_sweep(config);
  write_csv(result, args.out_csv);
  std::cout << "wrote " << result.records.size() << " records to " << args.out_csv
            << "\n";
  if (!args.out_plot.empty()) {
    plot_curves(result, args.out_plot);
    std::cout << "wrote plot to " << args.out_plot << "\n";
  }
}

int run_check(std::uint64_t seed) {
  std::mt19937_64 engine(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  const auto randn = [&](int r, int c) {
    Eigen::MatrixXd m(r, c);
    for (int j = 0; j < c; ++j)
      for (int i = 0; i < r; ++i) m(i, j) = normal(engine);
    return m;
  };

  int failures = 0;
  const auto report = [&](const std::string& name, bool ok) {
    std::cout << (ok ? "ok:   " : "FAIL: ") << name << "\n";
    if (!ok) ++failures;
  };

  {
    const Eigen::MatrixXd b = make_random_basis(12, 4, mix_seed(seed, 1));
    report("generated bases have orthonormal columns",
           (b.transpose() * b - Eigen::MatrixXd::Identity(4, 4)).cwiseAbs().maxCoeff() <=
               1e-10);
  }
  {
    const Eigen::MatrixXd w = randn(6, 3);
    const Eigen::MatrixXd hard = project_hard(w);
    const Eigen::VectorXd sv = thin_svd(hard).singular_values;
    report("hard projection yields unit singular values",
           (sv.array() - 1.0).abs().maxCoeff() <= 1e-10);
    const ConstraintLevel level{0.3, false};
    const Eigen::MatrixXd soft = project_soft(w, level);
    report("soft projection is idempotent",
           (project_soft(soft, level) - soft).cwiseAbs().maxCoeff() <= 1e-10);
    report("soft projection at alpha 0 equals the hard projection",
           (project_soft(w, {0.0, false}) - hard).cwiseAbs().maxCoeff() <= 1e-10);
  }
  {
    const Eigen::MatrixXd x = randn(7, 5);
    const Eigen::MatrixXd pinv = pseudoinverse(x);
    const bool penrose = (x * pinv * x - x).norm() <= 1e-8 * x.norm() &&
                         (pinv * x * pinv - pinv).norm() <= 1e-8 * pinv.norm() &&
                         ((x * pinv) - (x * pinv).transpose()).norm() <= 1e-8 &&
                         ((pinv * x) - (pinv * x).transpose()).norm() <= 1e-8;
    report("pseudoinverse satisfies the Penrose identities", penrose);
  }
  {
    // central finite differences against the analytic descent directions
    const Eigen::MatrixXd x_sup = randn(6, 4), z_sup = randn(3, 4);
    const Eigen::MatrixXd x_unsup = randn(6, 5), w = randn(6, 3);
    const double h = 1e-6;
    bool ok = true;
    Eigen::MatrixXd fd(6, 3);
    Eigen::MatrixXd probe = w;
    for (int j = 0; j < 3; ++j)
      for (int i = 0; i < 6; ++i) {
        probe(i, j) = w(i, j) + h;
        const double up = semisup_objective(x_sup, z_sup, x_unsup, probe);
        probe(i, j) = w(i, j) - h;
        const double down = semisup_objective(x_sup, z_sup, x_unsup, probe);
        probe(i, j) = w(i, j);
        fd(i, j) = (up - down) / (2.0 * h);
      }
    ok = (fd - 2.0 * semisup_descent(x_sup, z_sup, x_unsup, w)).norm() <=
         1e-5 * fd.norm();
    for (int j = 0; j < 3 && ok; ++j)
      for (int i = 0; i < 6; ++i) {
        probe(i, j) = w(i, j) + h;
        const double up = unsup_objective(x_unsup, probe);
        probe(i, j) = w(i, j) - h;
        const double down = unsup_objective(x_unsup, probe);
        probe(i, j) = w(i, j);
        fd(i, j) = (up - down) / (2.0 * h);
      }
    ok = ok && (fd - 2.0 * unsup_descent(x_unsup, w)).norm() <= 1e-5 * fd.norm();
    report("descent directions match finite differences", ok);
  }
  {
    const GroundTruthModel model(make_random_basis(16, 5, mix_seed(seed, 2)), 0.3);
    const Dataset data = sample_dataset(model, 8, 0, mix_seed(seed, 3));
    const FeatureSet s =
        FeatureSet::prefix(grow_feature_orders(16, 1, mix_seed(seed, 4))[0], 10, 16);
    const Eigen::MatrixXd x_s = restrict_rows(data.x, s);
    const SubspaceEstimate est = fit_unsupervised_pca(x_s, 4, s);

    const double e_in = unsup_in_sample(embed(est), data.x);
    const Eigen::MatrixXd excluded =
        restrict_rows(data.x, FeatureSet(s.complement(), 16));
    const double expected =
        unsup_in_sample_S(est.matrix, x_s) + excluded.squaredNorm() / 8.0;
    report("in-sample errors decompose across included and excluded coordinates",
           std::abs(e_in - expected) <= 1e-8 * std::max(1.0, expected));

    const Eigen::MatrixXd c_x = true_covariance(model);
    const double trace_form = unsup_out_of_sample_trace(embed(est), c_x);
    const double spectral_form = unsup_out_of_sample_spectral(
        eig_symmetric(c_x).eigenvalues, eig_symmetric(restrict_principal(c_x, s)),
        eig_symmetric(x_s * x_s.transpose() / 8.0), 4);
    report("spectral and trace out-of-sample formulas agree",
           std::abs(trace_form - spectral_form) <= 1e-8 * std::max(1.0, trace_form));

    bool monotone = true;
    double previous = std::numeric_limits<double>::infinity();
    for (int k = 1; k <= 10; ++k) {
      const SubspaceEstimate nested = fit_unsupervised_pca(x_s, k, s);
      const double e = unsup_out_of_sample_trace(embed(nested), c_x);
      if (e > previous + 1e-9) monotone = false;
      previous = e;
    }
    report("out-of-sample error is monotone in the subspace rank", monotone);
  }
  {
    const Eigen::MatrixXd g = randn(7, 10);
    const Eigen::MatrixXd c = g * g.transpose() / 10.0;
    std::vector<int> keep;
    for (int i = 0; i < 6; ++i) keep.push_back(i);
    const Eigen::MatrixXd sub = restrict_principal(c, FeatureSet(keep, 7));
    report("eigenvalue interlacing holds for nested covariances",
           interlacing_check(c, sub).holds);
  }
  return failures == 0 ? kExitOk : kExitDivergence;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"subspace fitting experiments across the supervision-orthonormality plane"};
  app.require_subcommand(1);

  GenArgs gen;
  CLI::App* gen_cmd = app.add_subcommand("gen", "generate a model and dataset");
  gen_cmd->add_option("--basis", gen.basis, "hadamard or random");
  gen_cmd->add_option("--d", gen.d, "ambient dimension");
  gen_cmd->add_option("--m", gen.m, "latent dimension");
  gen_cmd->add_option("--sigma", gen.sigma, "noise standard deviation");
  gen_cmd->add_option("--n", gen.n, "number of samples");
  gen_cmd->add_option("--nsup", gen.nsup, "number of supervised pairs");
  gen_cmd->add_option("--seed", gen.seed, "random seed");
  gen_cmd->add_option("--out", gen.out, "output path prefix")->required();

  FitArgs fit;
  CLI::App* fit_cmd = app.add_subcommand("fit", "fit one estimate at one plane point");
  fit_cmd->add_option("--alpha", fit.alpha, "constraint softness (number or inf)");
  fit_cmd->add_option("--nsup", fit.nsup, "number of supervised pairs");
  fit_cmd->add_option("--p", fit.p, "number of features")->required();
  fit_cmd->add_option("--k", fit.k, "subspace rank (default m)");
  fit_cmd->add_option("--data", fit.data, "dataset path prefix from gen")->required();
  fit_cmd->add_option("--order-seed", fit.order_seed, "feature order seed");
  fit_cmd->add_option("--report", fit.report, "report output path (default stdout)");

  SweepArgs sweep;
  CLI::App* sweep_cmd = app.add_subcommand("sweep", "run a full experiment sweep");
  sweep_cmd->add_option("--config", sweep.config, "config file")->required();
  sweep_cmd->add_option("--out-csv", sweep.out_csv, "csv output path")->required();
  sweep_cmd->add_option("--out-plot", sweep.out_plot, "svg output path");

  std::uint64_t check_seed = 1;
  CLI::App* check_cmd =
      app.add_subcommand("check", "run the invariant suite on random instances");
  check_cmd->add_option("--seed", check_seed, "random seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfig;
  }

  try {
    if (*gen_cmd) run_gen(gen);
    if (*fit_cmd) run_fit(fit);
    if (*sweep_cmd) run_sweep_cmd(sweep);
    if (*check_cmd) return run_check(check_seed);
  } catch (const divergence_error& e) {
    std::cerr << "divergence: " << e.what() << "\n";
    return kExitDivergence;
  } catch (const io_error& e) {
    std::cerr << "io error: " << e.what() << "\n";
    return kExitIo;
  } catch (const config_error& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  }
  return kExitOk;
}
