#include "subfit/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <random>

#include "subfit/rng.hpp"

namespace subfit {

namespace {

void validate_options(const PgdOptions& opts) {
  if (opts.max_iters < 1) throw std::invalid_argument("max_iters must be >= 1");
  if (!(opts.rel_tol > 0.0)) throw std::invalid_argument("rel_tol must be > 0");
  if (opts.line_search_factors.empty())
    throw std::invalid_argument("line search factors must be nonempty");
  bool has_one = false;
  for (double f : opts.line_search_factors) {
    if (!(f > 0.0)) throw std::invalid_argument("line search factors must be > 0");
    if (f == 1.0) has_one = true;
  }
  if (!has_one)
    throw std::invalid_argument("line search factors must include 1.0");
}

void check_features(const Eigen::MatrixXd& x_s, const FeatureSet& features) {
  if (features.size() != x_s.rows())
    throw std::invalid_argument("feature set size does not match data rows");
}

double spectral_norm(const Eigen::MatrixXd& x) {
  if (x.size() == 0) return 0.0;
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(x);
  return svd.singularValues()(0);
}

Eigen::MatrixXd gaussian_init(int p, int m, std::uint64_t seed) {
  std::mt19937_64 engine(seed);
  std::normal_distribution<double> normal(0.0, 1.0 / std::sqrt(static_cast<double>(p)));
  Eigen::MatrixXd h(p, m);
  for (int j = 0; j < m; ++j)
    for (int i = 0; i < p; ++i) h(i, j) = normal(engine);
  return h;
}

// Residual cost ||(I - W W^T) X||_F^2 evaluated without forming the projector.
double residual_cost(const Eigen::MatrixXd& x, const Eigen::MatrixXd& w) {
  if (x.cols() == 0) return 0.0;
  return (x - w * (w.transpose() * x)).squaredNorm();
}

// Descent direction for residual_cost given a = X X^T (half its gradient; the
// constant 2 from differentiating the squared norm is absorbed into the step).
Eigen::MatrixXd residual_descent(const Eigen::MatrixXd& a, const Eigen::MatrixXd& w) {
  const Eigen::MatrixXd aw = a * w;
  return -2.0 * aw + aw * (w.transpose() * w) + w * (w.transpose() * aw);
}

struct PgdProblem {
  std::function<double(const Eigen::MatrixXd&)> objective;
  std::function<Eigen::MatrixXd(const Eigen::MatrixXd&)> descent;
};

// Projected gradient descent with a step-scaling line search. Each pass picks
// the best of mu * factors by post-projection objective; a pass that cannot
// improve rejects the step and shrinks mu, so the search backtracks across
// passes. Stops on relative objective decrease below rel_tol (measured against
// the initial objective), on step underflow, or after max_iters passes.
FitReport run_pgd(const PgdProblem& problem, const Eigen::MatrixXd& w_init,
                  const ConstraintLevel& level, const PgdOptions& opts,
                  const FeatureSet& features, double sigma_max) {
  validate_options(opts);
  const double min_factor =
      *std::min_element(opts.line_search_factors.begin(),
                        opts.line_search_factors.end());

  double mu = opts.initial_step > 0.0
                  ? opts.initial_step
                  : (sigma_max > 0.0 ? 1.0 / (2.0 * sigma_max * sigma_max) : 1.0);
  const double mu_floor = mu * 1e-12;

  Eigen::MatrixXd w = project_soft(w_init, level);
  double objective = problem.objective(w);
  if (!std::isfinite(objective))
    throw divergence_error("objective not finite at initialization");

  std::vector<double> trace{objective};
  int iterations = 0;

  for (int pass = 0; pass < opts.max_iters; ++pass) {
    const Eigen::MatrixXd direction = problem.descent(w);

    std::map<double, std::pair<double, Eigen::MatrixXd>> candidates;
    auto objective_at_step = [&](double step) {
      auto it = candidates.find(step);
      if (it != candidates.end()) return it->second.first;
      Eigen::MatrixXd cand = project_soft(w - step * direction, level);
      double value = problem.objective(cand);
      candidates.emplace(step, std::make_pair(value, std::move(cand)));
      return value;
    };

    double chosen = line_search_step(mu, objective_at_step, opts.line_search_factors);
    if (!std::isfinite(candidates.at(chosen).first)) {
      // Divergence guard: halve the step and retry once.
      candidates.clear();
      mu *= 0.5;
      chosen = line_search_step(mu, objective_at_step, opts.line_search_factors);
      if (!std::isfinite(candidates.at(chosen).first))
        throw divergence_error("objective not finite after step halving");
    }

    const double candidate_objective = candidates.at(chosen).first;
    if (candidate_objective > objective) {
      mu *= min_factor;
      if (mu < mu_floor) break;  // no descent step left at this point
      continue;
    }

    w = std::move(candidates.at(chosen).second);
    mu = chosen;
    const double decrease =
        (objective - candidate_objective) / std::max(trace.front(), 1e-12);
    objective = candidate_objective;
    trace.push_back(objective);
    ++iterations;
    if (decrease < opts.rel_tol) break;
  }

  return FitReport{SubspaceEstimate{std::move(w), features}, iterations,
                   trace.back(), std::move(trace)};
}

}  // namespace

double supervised_objective(const Eigen::MatrixXd& x_s, const Eigen::MatrixXd& z,
                            const Eigen::MatrixXd& w) {
  return (z - w.transpose() * x_s).squaredNorm() / static_cast<double>(x_s.cols());
}

Eigen::MatrixXd supervised_descent(const Eigen::MatrixXd& x_s,
                                   const Eigen::MatrixXd& z,
                                   const Eigen::MatrixXd& w) {
  return x_s * (w.transpose() * x_s - z).transpose();
}

double semisup_objective(const Eigen::MatrixXd& x_sup, const Eigen::MatrixXd& z_sup,
                         const Eigen::MatrixXd& x_unsup, const Eigen::MatrixXd& w) {
  const double sup = x_sup.cols() > 0
                         ? (z_sup - w.transpose() * x_sup).squaredNorm()
                         : 0.0;
  return sup + residual_cost(x_unsup, w);
}

Eigen::MatrixXd semisup_descent(const Eigen::MatrixXd& x_sup,
                                const Eigen::MatrixXd& z_sup,
                                const Eigen::MatrixXd& x_unsup,
                                const Eigen::MatrixXd& w) {
  Eigen::MatrixXd g = Eigen::MatrixXd::Zero(w.rows(), w.cols());
  if (x_sup.cols() > 0) g += x_sup * (w.transpose() * x_sup - z_sup).transpose();
  if (x_unsup.cols() > 0) g += residual_descent(x_unsup * x_unsup.transpose(), w);
  return g;
}

double unsup_objective(const Eigen::MatrixXd& x_s, const Eigen::MatrixXd& w) {
  return residual_cost(x_s, w);
}

Eigen::MatrixXd unsup_descent(const Eigen::MatrixXd& x_s, const Eigen::MatrixXd& w) {
  return residual_descent(x_s * x_s.transpose(), w);
}

SubspaceEstimate fit_unsupervised_pca(const Eigen::MatrixXd& x_s, int k,
                                      const FeatureSet& features) {
  check_features(x_s, features);
  if (x_s.cols() < 1) throw std::invalid_argument("need at least one sample");
  const int p = static_cast<int>(x_s.rows());
  if (k < 1 || k > p) throw std::invalid_argument("need 1 <= k <= p");
  const Eigen::MatrixXd sample_cov =
      x_s * x_s.transpose() / static_cast<double>(x_s.cols());
  const SpectralDecomposition decomp = eig_symmetric(sample_cov);
  return SubspaceEstimate{decomp.eigenvectors.leftCols(k), features};
}

SubspaceEstimate fit_regression(const Eigen::MatrixXd& x_s, const Eigen::MatrixXd& z,
                                const FeatureSet& features) {
  check_features(x_s, features);
  if (z.cols() != x_s.cols())
    throw std::invalid_argument("data and targets need equal sample counts");
  if (x_s.cols() < 1) throw std::invalid_argument("need at least one sample");
  return SubspaceEstimate{(z * pseudoinverse(x_s)).transpose(), features};
}

FitReport fit_supervised_pgd(const Eigen::MatrixXd& x_s, const Eigen::MatrixXd& z,
                             const ConstraintLevel& level, const PgdOptions& opts,
                             const FeatureSet& features) {
  check_features(x_s, features);
  if (z.cols() != x_s.cols())
    throw std::invalid_argument("data and targets need equal sample counts");
  if (x_s.cols() < 1) throw std::invalid_argument("need at least one sample");
  if (x_s.rows() < z.rows()) throw std::invalid_argument("need p >= m");

  PgdProblem problem{
      [&](const Eigen::MatrixXd& w) { return supervised_objective(x_s, z, w); },
      [&](const Eigen::MatrixXd& w) { return supervised_descent(x_s, z, w); }};
  const Eigen::MatrixXd w_init = (z * pseudoinverse(x_s)).transpose();
  return run_pgd(problem, w_init, level, opts, features, spectral_norm(x_s));
}

FitReport fit_semisupervised_pgd(const Eigen::MatrixXd& x_sup,
                                 const Eigen::MatrixXd& z_sup,
                                 const Eigen::MatrixXd& x_unsup,
                                 const ConstraintLevel& level,
                                 const PgdOptions& opts,
                                 const FeatureSet& features) {
  const int p = static_cast<int>(x_sup.rows());
  const int m = static_cast<int>(z_sup.rows());
  if (x_unsup.rows() != p)
    throw std::invalid_argument("supervised and unsupervised parts disagree on p");
  if (z_sup.cols() != x_sup.cols())
    throw std::invalid_argument("data and targets need equal sample counts");
  if (p < m) throw std::invalid_argument("need p >= m");
  if (x_sup.cols() + x_unsup.cols() < 2)
    throw std::invalid_argument("need at least two samples in total");
  if (features.size() != p)
    throw std::invalid_argument("feature set size does not match data rows");

  const Eigen::MatrixXd a_unsup =
      x_unsup.cols() > 0 ? Eigen::MatrixXd(x_unsup * x_unsup.transpose())
                         : Eigen::MatrixXd::Zero(p, p);
  PgdProblem problem{
      [&](const Eigen::MatrixXd& w) {
        return semisup_objective(x_sup, z_sup, x_unsup, w);
      },
      [&](const Eigen::MatrixXd& w) {
        Eigen::MatrixXd g = residual_descent(a_unsup, w);
        if (x_sup.cols() > 0)
          g += x_sup * (w.transpose() * x_sup - z_sup).transpose();
        return g;
      }};

  Eigen::MatrixXd x_all(p, x_sup.cols() + x_unsup.cols());
  x_all.leftCols(x_sup.cols()) = x_sup;
  x_all.rightCols(x_unsup.cols()) = x_unsup;
  return run_pgd(problem, gaussian_init(p, m, opts.seed), level, opts, features,
                 spectral_norm(x_all));
}

FitReport fit_unsupervised_pgd(const Eigen::MatrixXd& x_s, int m,
                               const ConstraintLevel& level, const PgdOptions& opts,
                               const FeatureSet& features) {
  check_features(x_s, features);
  const int p = static_cast<int>(x_s.rows());
  if (m < 1 || p < m) throw std::invalid_argument("need 1 <= m <= p");

  ConstraintLevel floored = level;
  floored.floor_mode = true;
  const Eigen::MatrixXd a = x_s * x_s.transpose();
  PgdProblem problem{
      [&](const Eigen::MatrixXd& w) { return residual_cost(x_s, w); },
      [&](const Eigen::MatrixXd& w) { return residual_descent(a, w); }};
  return run_pgd(problem, gaussian_init(p, m, opts.seed), floored, opts, features,
                 spectral_norm(x_s));
}

double line_search_step(double current_mu,
                        const std::function<double(double)>& objective_at_step,
                        std::span<const double> factors) {
  if (factors.empty())
    throw std::invalid_argument("line search factors must be nonempty");
  std::vector<double> ordered(factors.begin(), factors.end());
  std::sort(ordered.begin(), ordered.end());

  double best_mu = current_mu * ordered.front();
  double best_value = std::numeric_limits<double>::infinity();
  bool any = false;
  for (double factor : ordered) {
    const double step = current_mu * factor;
    double value = objective_at_step(step);
    if (std::isnan(value)) value = std::numeric_limits<double>::infinity();
    // <= so equal objectives resolve toward the largest factor.
    if (!any || value <= best_value) {
      best_value = value;
      best_mu = step;
      any = true;
    }
  }
  return best_mu;
}

Eigen::MatrixXd embed(const SubspaceEstimate& estimate) {
  Eigen::MatrixXd out =
      Eigen::MatrixXd::Zero(estimate.ambient_dim(), estimate.target_dim());
  const auto& idx = estimate.features.indices();
  for (int i = 0; i < estimate.feature_dim(); ++i)
    out.row(idx[i]) = estimate.matrix.row(i);
  return out;
}

}  // namespace subfit
