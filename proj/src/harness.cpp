#include "subfit/harness.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>

#include "subfit/matrix_io.hpp"
#include "subfit/rng.hpp"

namespace subfit {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kMissing = std::numeric_limits<double>::quiet_NaN();

const char* kCsvHeader =
    "trajectory_alpha,trajectory_nsup,trial,p,k,e_in,e_in_S,e_out,"
    "e_out_source,iterations";

std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r\n");
  if (begin == std::string::npos) return "";
  const auto end = s.find_last_not_of(" \t\r\n");
  return s.substr(begin, end - begin + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> parts;
  std::string current;
  for (char c : s) {
    if (c == sep) {
      parts.push_back(current);
      current.clear();
    } else {
      current += c;
    }
  }
  parts.push_back(current);
  return parts;
}

double parse_double(const std::string& text, const std::string& what) {
  const std::string t = trim(text);
  if (t == "inf" || t == "+inf") return kInf;
  try {
    std::size_t pos = 0;
    const double v = std::stod(t, &pos);
    if (pos != t.size()) throw std::invalid_argument(t);
    return v;
  } catch (const std::exception&) {
    throw config_error("cannot parse number for " + what + ": '" + t + "'");
  }
}

long parse_int(const std::string& text, const std::string& what) {
  const std::string t = trim(text);
  try {
    std::size_t pos = 0;
    const long v = std::stol(t, &pos);
    if (pos != t.size()) throw std::invalid_argument(t);
    return v;
  } catch (const std::exception&) {
    throw config_error("cannot parse integer for " + what + ": '" + t + "'");
  }
}

std::vector<double> parse_double_list(const std::string& text, const std::string& what) {
  std::vector<double> out;
  for (const auto& part : split(text, ','))
    out.push_back(parse_double(part, what));
  return out;
}

std::vector<int> parse_int_list(const std::string& text, const std::string& what) {
  std::vector<int> out;
  for (const auto& part : split(text, ','))
    out.push_back(static_cast<int>(parse_int(part, what)));
  return out;
}

bool strict_unsupervised(const std::vector<PlanePoint>& trajectory) {
  return std::all_of(trajectory.begin(), trajectory.end(), [](const PlanePoint& pt) {
    return pt.alpha == 0.0 && pt.n_sup == 0;
  });
}

void validate_config(const SweepConfig& c) {
  if (c.d < 2) throw config_error("need d >= 2");
  if (c.m < 1 || c.m >= c.d) throw config_error("need 1 <= m < d");
  if (c.sigma < 0.0) throw config_error("need sigma >= 0");
  if (c.n < 2) throw config_error("need n >= 2");
  if (c.trajectory.empty()) throw config_error("trajectory is empty");
  for (const auto& pt : c.trajectory) {
    if (!(pt.alpha >= 0.0)) throw config_error("need alpha >= 0 (or inf)");
    if (pt.n_sup < 0 || pt.n_sup > c.n) throw config_error("need 0 <= nsup <= n");
  }
  if (c.num_orders < 1) throw config_error("need orders >= 1");
  if (c.n_test < 1) throw config_error("need n_test >= 1");
  if (c.p_min < 1 || c.p_min > c.p_max || c.p_max > c.d)
    throw config_error("need 1 <= p_min <= p_max <= d");

  const bool pure_unsup = strict_unsupervised(c.trajectory);
  if (!c.k_values.empty()) {
    for (int k : c.k_values)
      if (k < 1 || k > c.d) throw config_error("need 1 <= k <= d");
    if (!pure_unsup && (c.k_values.size() != 1 || c.k_values[0] != c.m))
      throw config_error("a k sweep is only supported for the strict unsupervised trajectory");
  }
  if (pure_unsup) {
    const int k_min = c.k_values.empty()
                          ? c.m
                          : *std::min_element(c.k_values.begin(), c.k_values.end());
    if (c.p_min < k_min) throw config_error("need p_min >= min(k)");
  } else if (c.p_min < c.m) {
    throw config_error("need p_min >= m for supervised or soft-constrained runs");
  }
  if (c.e_out_source == EOutSource::spectral_formula && !pure_unsup)
    throw config_error("the spectral e_out formula applies only to the strict unsupervised trajectory");
}

void append_context(std::exception_ptr error, const PlanePoint& pt, int trial, int p) {
  std::ostringstream ctx;
  ctx << " (at alpha=" << format_double(pt.alpha) << ", nsup=" << pt.n_sup
      << ", trial=" << trial << ", p=" << p << ")";
  try {
    std::rethrow_exception(error);
  } catch (const divergence_error& e) {
    throw divergence_error(e.what() + ctx.str());
  } catch (const config_error& e) {
    throw config_error(e.what() + ctx.str());
  } catch (const std::invalid_argument& e) {
    throw std::invalid_argument(e.what() + ctx.str());
  } catch (const std::exception& e) {
    throw std::runtime_error(e.what() + ctx.str());
  }
}

}  // namespace

SweepResult SweepResult::from_records(std::vector<SweepRecord> records) {
  SweepResult result;
  result.records = std::move(records);

  struct Accum {
    double e_in = 0, e_in_s = 0, e_out = 0;
    int n_in = 0, n_in_s = 0, n_out = 0;
  };
  std::map<std::tuple<double, int, int, int>, std::size_t> index;
  std::vector<Accum> accums;
  for (const auto& rec : result.records) {
    const auto key = std::make_tuple(rec.alpha, rec.n_sup, rec.p, rec.k);
    auto it = index.find(key);
    if (it == index.end()) {
      it = index.emplace(key, accums.size()).first;
      accums.emplace_back();
      result.averaged.push_back(
          AveragedRecord{rec.alpha, rec.n_sup, rec.p, rec.k, kMissing, kMissing, kMissing});
    }
    Accum& acc = accums[it->second];
    if (std::isfinite(rec.e_in)) { acc.e_in += rec.e_in; ++acc.n_in; }
    if (std::isfinite(rec.e_in_s)) { acc.e_in_s += rec.e_in_s; ++acc.n_in_s; }
    if (std::isfinite(rec.e_out)) { acc.e_out += rec.e_out; ++acc.n_out; }
  }
  for (std::size_t i = 0; i < accums.size(); ++i) {
    const Accum& acc = accums[i];
    if (acc.n_in > 0) result.averaged[i].e_in = acc.e_in / acc.n_in;
    if (acc.n_in_s > 0) result.averaged[i].e_in_s = acc.e_in_s / acc.n_in_s;
    if (acc.n_out > 0) result.averaged[i].e_out = acc.e_out / acc.n_out;
  }
  return result;
}

std::vector<PlanePoint> trajectory_presets(const std::string& name, int n) {
  const std::vector<double> alpha_grid = {0.0, 0.05, 0.1, 0.3, 1.0, 3.0, kInf};
  std::vector<PlanePoint> out;
  if (name == "bottom-edge") {
    for (double a : alpha_grid) out.push_back({a, n});
  } else if (name == "right-edge") {
    for (int i = 0; i <= 8; ++i)
      out.push_back({kInf, static_cast<int>(std::lround(i * n / 8.0))});
  } else if (name == "diagonal") {
    const int steps = static_cast<int>(alpha_grid.size());
    for (int i = 0; i < steps; ++i)
      out.push_back({alpha_grid[i],
                     static_cast<int>(std::lround(i * static_cast<double>(n) / (steps - 1)))});
  } else {
    throw config_error("unknown trajectory preset: " + name);
  }
  return out;
}

SweepConfig parse_config_text(const std::string& text) {
  SweepConfig c;
  c.seed = 1;
  std::vector<double> alphas;
  std::vector<int> nsups;
  std::string preset;
  bool has_d = false, has_m = false, has_n = false, has_sigma = false;
  bool has_pmin = false, has_pmax = false;

  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw config_error("line " + std::to_string(line_no) + ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));

    if (key == "basis") {
      if (value == "hadamard") c.basis = BasisKind::hadamard;
      else if (value == "random") c.basis = BasisKind::random_orthonormal;
      else throw config_error("basis must be hadamard or random, got '" + value + "'");
    } else if (key == "d") { c.d = static_cast<int>(parse_int(value, key)); has_d = true; }
    else if (key == "m") { c.m = static_cast<int>(parse_int(value, key)); has_m = true; }
    else if (key == "sigma") { c.sigma = parse_double(value, key); has_sigma = true; }
    else if (key == "seed") { c.seed = static_cast<std::uint64_t>(parse_int(value, key)); }
    else if (key == "n") { c.n = static_cast<int>(parse_int(value, key)); has_n = true; }
    else if (key == "trajectory") { preset = value; }
    else if (key == "alpha") { alphas = parse_double_list(value, key); }
    else if (key == "nsup") { nsups = parse_int_list(value, key); }
    else if (key == "k") { c.k_values = parse_int_list(value, key); }
    else if (key == "p_min") { c.p_min = static_cast<int>(parse_int(value, key)); has_pmin = true; }
    else if (key == "p_max") { c.p_max = static_cast<int>(parse_int(value, key)); has_pmax = true; }
    else if (key == "orders") { c.num_orders = static_cast<int>(parse_int(value, key)); }
    else if (key == "n_test") { c.n_test = static_cast<int>(parse_int(value, key)); }
    else if (key == "max_iters") { c.pgd.max_iters = static_cast<int>(parse_int(value, key)); }
    else if (key == "rel_tol") { c.pgd.rel_tol = parse_double(value, key); }
    else if (key == "e_out") {
      if (value == "analytic") c.e_out_source = EOutSource::analytic_trace;
      else if (value == "monte-carlo") c.e_out_source = EOutSource::monte_carlo;
      else if (value == "spectral") c.e_out_source = EOutSource::spectral_formula;
      else throw config_error("e_out must be analytic, monte-carlo or spectral, got '" + value + "'");
    } else {
      throw config_error("unknown config key: '" + key + "'");
    }
  }

  if (!has_d || !has_m || !has_n || !has_sigma)
    throw config_error("config must set d, m, n and sigma");

  if (!preset.empty()) {
    if (!alphas.empty() || !nsups.empty())
      throw config_error("give either trajectory or alpha/nsup lists, not both");
    c.trajectory = trajectory_presets(preset, c.n);
  } else {
    if (alphas.empty() || nsups.empty())
      throw config_error("config must set a trajectory preset or alpha and nsup lists");
    if (alphas.size() == 1 && nsups.size() > 1) alphas.assign(nsups.size(), alphas[0]);
    if (nsups.size() == 1 && alphas.size() > 1) nsups.assign(alphas.size(), nsups[0]);
    if (alphas.size() != nsups.size())
      throw config_error("alpha and nsup lists must have equal length");
    for (std::size_t i = 0; i < alphas.size(); ++i)
      c.trajectory.push_back({alphas[i], nsups[i]});
  }

  if (!has_pmin) c.p_min = strict_unsupervised(c.trajectory) && !c.k_values.empty()
                               ? *std::min_element(c.k_values.begin(), c.k_values.end())
                               : c.m;
  if (!has_pmax) c.p_max = c.d;
  validate_config(c);
  return c;
}

SweepConfig parse_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw io_error("cannot open config: " + path);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_config_text(buffer.str());
}

SweepRecord evaluate_cell(const GroundTruthModel& model, const Dataset& data,
                          const FeatureSet& s, const PlanePoint& pt, int k,
                          const PgdOptions& opts, EOutSource e_out_source,
                          int n_test, std::uint64_t fit_seed,
                          std::uint64_t metric_seed) {
  // k is free only on the strict unsupervised path; every other estimator
  // targets the latent rank m.
  if (!(pt.n_sup == 0 && pt.alpha == 0.0)) k = model.latent_dim();

  SweepRecord rec;
  rec.alpha = pt.alpha;
  rec.n_sup = pt.n_sup;
  rec.p = s.size();
  rec.k = k;
  rec.e_in = rec.e_in_s = rec.e_out = kMissing;
  rec.iterations = -1;

  const int p = s.size();
  if (k > p) return rec;  // undefined grid cell

  const Eigen::MatrixXd x_s = restrict_rows(data, s);
  const int n = data.num_samples();
  PgdOptions fit_opts = opts;
  fit_opts.seed = fit_seed;

  SubspaceEstimate estimate{Eigen::MatrixXd(), s};
  ErrorRecord errors;
  rec.iterations = 0;

  if (pt.n_sup == 0) {
    if (pt.alpha == 0.0) {
      estimate = fit_unsupervised_pca(x_s, k, s);
    } else {
      FitReport rep = fit_unsupervised_pgd(x_s, model.latent_dim(),
                                           ConstraintLevel{pt.alpha, true},
                                           fit_opts, s);
      estimate = std::move(rep.estimate);
      rec.iterations = rep.iterations;
    }
    const Eigen::MatrixXd u = embed(estimate);
    errors.e_in = unsup_in_sample(u, data.x);
    errors.e_in_s = unsup_in_sample_S(estimate.matrix, x_s);
    errors.e_out_source = e_out_source;
    switch (e_out_source) {
      case EOutSource::analytic_trace:
        errors.e_out = unsup_out_of_sample_trace(u, true_covariance(model));
        break;
      case EOutSource::spectral_formula: {
        const SpectralDecomposition true_restricted =
            eig_symmetric(restrict_principal(true_covariance(model), s));
        const SpectralDecomposition sample_restricted =
            eig_symmetric(x_s * x_s.transpose() / static_cast<double>(n));
        errors.e_out = unsup_out_of_sample_spectral(
            eig_symmetric(true_covariance(model)).eigenvalues, true_restricted,
            sample_restricted, k);
        break;
      }
      case EOutSource::monte_carlo:
        errors.e_out = unsup_out_of_sample_monte_carlo(u, model, n_test, metric_seed);
        break;
    }
  } else {
    // Supervised and semi-supervised points estimate the m-dimensional map.
    if (!data.z.has_value())
      throw std::invalid_argument("trajectory point needs latent targets in the dataset");
    const Eigen::MatrixXd& z = *data.z;
    if (pt.n_sup == n) {
      if (pt.alpha == kInf) {
        estimate = fit_regression(x_s, z, s);
      } else {
        FitReport rep = fit_supervised_pgd(x_s, z, ConstraintLevel{pt.alpha, false},
                                           fit_opts, s);
        estimate = std::move(rep.estimate);
        rec.iterations = rep.iterations;
      }
    } else {
      FitReport rep = fit_semisupervised_pgd(
          x_s.leftCols(pt.n_sup), z.leftCols(pt.n_sup), x_s.rightCols(n - pt.n_sup),
          ConstraintLevel{pt.alpha, false}, fit_opts, s);
      estimate = std::move(rep.estimate);
      rec.iterations = rep.iterations;
    }

    const Eigen::MatrixXd u = embed(estimate);
    errors.e_in = sup_in_sample(u, data.x.leftCols(pt.n_sup), z.leftCols(pt.n_sup));
    errors.e_out_source = e_out_source;
    if (e_out_source == EOutSource::monte_carlo)
      errors.e_out = sup_out_of_sample_monte_carlo(u, model, n_test, metric_seed);
    else
      errors.e_out = sup_out_of_sample_analytic(u, model);
  }

  rec.e_in = errors.e_in;
  rec.e_in_s = errors.e_in_s;
  rec.e_out = errors.e_out;
  rec.e_out_source = errors.e_out_source;
  return rec;
}

SweepResult run_sweep(const SweepConfig& config) {
  validate_config(config);

  const Eigen::MatrixXd basis =
      config.basis == BasisKind::hadamard
          ? make_hadamard_basis(config.d, config.m)
          : make_random_basis(config.d, config.m, mix_seed(config.seed, 0));
  const GroundTruthModel model(basis, config.sigma);
  const Dataset data = sample_dataset(model, config.n, config.n, mix_seed(config.seed, 1));
  const auto orders =
      grow_feature_orders(config.d, config.num_orders, mix_seed(config.seed, 2));

  std::vector<int> k_values = config.k_values;
  if (k_values.empty()) k_values = {config.m};
  if (!strict_unsupervised(config.trajectory)) k_values = {config.m};

  std::vector<SweepRecord> records;
  for (std::size_t pt_idx = 0; pt_idx < config.trajectory.size(); ++pt_idx) {
    const PlanePoint& pt = config.trajectory[pt_idx];
    for (int trial = 0; trial < config.num_orders; ++trial) {
      for (int p = config.p_min; p <= config.p_max; ++p) {
        const FeatureSet s = FeatureSet::prefix(orders[trial], p, config.d);
        const std::uint64_t cell_seed = mix_seed(
            mix_seed(mix_seed(config.seed, 3 + pt_idx), trial), p);
        for (int k : k_values) {
          try {
            SweepRecord rec = evaluate_cell(model, data, s, pt, k, config.pgd,
                                            config.e_out_source, config.n_test,
                                            cell_seed, mix_seed(cell_seed, k));
            rec.trial = trial;
            records.push_back(rec);
          } catch (...) {
            append_context(std::current_exception(), pt, trial, p);
          }
        }
      }
    }
  }
  return SweepResult::from_records(std::move(records));
}

void write_csv(const SweepResult& result, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw io_error("cannot open for writing: " + path);
  out << kCsvHeader << '\n';
  for (const auto& rec : result.records) {
    out << format_double(rec.alpha) << ',' << rec.n_sup << ',' << rec.trial << ','
        << rec.p << ',' << rec.k << ',';
    if (std::isfinite(rec.e_in)) out << format_double(rec.e_in);
    out << ',';
    if (std::isfinite(rec.e_in_s)) out << format_double(rec.e_in_s);
    out << ',';
    if (std::isfinite(rec.e_out)) out << format_double(rec.e_out);
    out << ',';
    if (std::isfinite(rec.e_out)) out << to_string(rec.e_out_source);
    out << ',';
    if (rec.iterations >= 0) out << rec.iterations;
    out << '\n';
  }
  if (!out) throw io_error("write failed: " + path);
}

SweepResult read_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw io_error("cannot open for reading: " + path);
  std::string line;
  if (!std::getline(in, line)) throw io_error("empty csv: " + path);

  const std::vector<std::string> expected = split(kCsvHeader, ',');
  const std::vector<std::string> got = split(trim(line), ',');
  for (std::size_t i = 0; i < expected.size(); ++i) {
    if (i >= got.size() || got[i] != expected[i])
      throw io_error("csv schema mismatch in " + path + ": expected column '" +
                     expected[i] + "', got '" + (i < got.size() ? got[i] : "") + "'");
  }
  if (got.size() != expected.size())
    throw io_error("csv schema mismatch in " + path + ": unexpected extra column '" +
                   got[expected.size()] + "'");

  std::vector<SweepRecord> records;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const std::vector<std::string> f = split(line, ',');
    if (f.size() != expected.size())
      throw io_error("csv row " + std::to_string(line_no) + " has " +
                     std::to_string(f.size()) + " fields, expected " +
                     std::to_string(expected.size()));
    SweepRecord rec;
    try {
      rec.alpha = parse_double(f[0], "trajectory_alpha");
      rec.n_sup = static_cast<int>(parse_int(f[1], "trajectory_nsup"));
      rec.trial = static_cast<int>(parse_int(f[2], "trial"));
      rec.p = static_cast<int>(parse_int(f[3], "p"));
      rec.k = static_cast<int>(parse_int(f[4], "k"));
      rec.e_in = trim(f[5]).empty() ? kMissing : parse_double(f[5], "e_in");
      rec.e_in_s = trim(f[6]).empty() ? kMissing : parse_double(f[6], "e_in_S");
      rec.e_out = trim(f[7]).empty() ? kMissing : parse_double(f[7], "e_out");
      const std::string source = trim(f[8]);
      if (source == "analytic-trace") rec.e_out_source = EOutSource::analytic_trace;
      else if (source == "spectral-formula") rec.e_out_source = EOutSource::spectral_formula;
      else if (source == "monte-carlo") rec.e_out_source = EOutSource::monte_carlo;
      else if (!source.empty())
        throw io_error("unknown e_out_source '" + source + "'");
      rec.iterations =
          trim(f[9]).empty() ? -1 : static_cast<int>(parse_int(f[9], "iterations"));
    } catch (const config_error& e) {
      throw io_error("csv row " + std::to_string(line_no) + ": " + e.what());
    } catch (const io_error& e) {
      throw io_error("csv row " + std::to_string(line_no) + ": " + e.what());
    }
    records.push_back(rec);
  }
  return SweepResult::from_records(std::move(records));
}

}  // namespace subfit
