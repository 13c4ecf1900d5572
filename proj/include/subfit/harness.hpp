#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "subfit/estimators.hpp"
#include "subfit/metrics.hpp"
#include "subfit/model.hpp"

namespace subfit {

class config_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class BasisKind { hadamard, random_orthonormal };

/// One coordinate on the supervision-orthonormality plane: constraint softness
/// alpha (0 = strict orthonormality, +inf = unconstrained) and the number of
/// supervised pairs n_sup.
struct PlanePoint {
  double alpha = 0.0;
  int n_sup = 0;
};

struct SweepConfig {
  BasisKind basis = BasisKind::hadamard;
  int d = 0;
  int m = 0;
  double sigma = 0.0;
  std::uint64_t seed = 0;
  int n = 0;
  std::vector<PlanePoint> trajectory;
  std::vector<int> k_values;  // empty selects {m}
  int p_min = 0;
  int p_max = 0;
  int num_orders = 10;
  PgdOptions pgd;
  EOutSource e_out_source = EOutSource::analytic_trace;
  int n_test = 1000;
};

/// One evaluated cell. Missing values (undefined k > p cells) are NaN for the
/// error fields and -1 for iterations; e_out_source is meaningful only when
/// e_out is finite.
struct SweepRecord {
  double alpha = 0.0;
  int n_sup = 0;
  int trial = 0;
  int p = 0;
  int k = 0;
  double e_in = 0.0;
  double e_in_s = 0.0;
  double e_out = 0.0;
  EOutSource e_out_source = EOutSource::analytic_trace;
  int iterations = 0;
};

struct AveragedRecord {
  double alpha = 0.0;
  int n_sup = 0;
  int p = 0;
  int k = 0;
  double e_in = 0.0;
  double e_in_s = 0.0;
  double e_out = 0.0;
};

struct SweepResult {
  std::vector<SweepRecord> records;
  std::vector<AveragedRecord> averaged;  // per-(trajectory point, p, k) means

  /// Builds the averaged table from per-trial records (first-seen cell order).
  static SweepResult from_records(std::vector<SweepRecord> records);
};

/// Named plane trajectories:
///   bottom-edge : fully supervised, alpha in {0, 0.05, 0.1, 0.3, 1, 3, inf}
///   right-edge  : unconstrained, n_sup on a 9-point grid from 0 to n
///   diagonal    : jointly increasing (alpha, n_sup) from (0, 0) to (inf, n)
std::vector<PlanePoint> trajectory_presets(const std::string& name, int n);

/// Parses the flat key = value config format (see README). Lists are
/// comma-separated; "inf" denotes an unconstrained alpha.
SweepConfig parse_config_text(const std::string& text);
SweepConfig parse_config_file(const std::string& path);

/// Fits one estimate at the plane coordinate pt on the feature set s and
/// evaluates the applicable error metrics: subspace-residual errors for
/// unsupervised points (n_sup = 0), z-prediction errors otherwise. k is
/// honored only on the strict unsupervised path (elsewhere the target rank is
/// m); a k > s.size() cell comes back with missing values. fit_seed drives
/// PGD initialization, metric_seed any Monte Carlo evaluation. The trial field
/// of the returned record is left at 0.
SweepRecord evaluate_cell(const GroundTruthModel& model, const Dataset& data,
                          const FeatureSet& s, const PlanePoint& pt, int k,
                          const PgdOptions& opts, EOutSource e_out_source,
                          int n_test, std::uint64_t fit_seed,
                          std::uint64_t metric_seed);

/// Runs the full experiment described by the config: per trial draws a feature
/// order, sweeps p, dispatches each plane point to its estimator, evaluates
/// the applicable error metrics, and averages across trials. Deterministic
/// given config.seed.
SweepResult run_sweep(const SweepConfig& config);

/// CSV persistence with the fixed header
/// trajectory_alpha,trajectory_nsup,trial,p,k,e_in,e_in_S,e_out,e_out_source,iterations
/// at full double precision; missing values are empty fields.
void write_csv(const SweepResult& result, const std::string& path);
SweepResult read_csv(const std::string& path);

/// Self-contained SVG: one error-vs-p polyline per trajectory point on a log
/// error axis, or a p x k heatmap when the sweep covers several k values.
void plot_curves(const SweepResult& result, const std::string& path);

}  // namespace subfit
