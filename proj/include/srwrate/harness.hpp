#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "srwrate/io.hpp"
#include "srwrate/measures.hpp"
#include "srwrate/srw.hpp"

namespace srwrate {

enum class MetricKind { W1, W2, S1, Sk };

struct Metric {
  MetricKind kind = MetricKind::S1;
  int k = 1;  // only for Sk

  /// "w1", "w2", "s1", "sk" (k from the caller) or "sk:K".
  static Metric parse(const std::string& name, int k = 1);
  std::string name() const;
};

/// metric(mu, nu) with the given SRW settings.
double evaluate_metric(const Metric& metric, const DiscreteMeasure& mu, const DiscreteMeasure& nu,
                       const SrwOptions& srw, SrwResult* detail = nullptr);

inline constexpr std::size_t kReferenceSize = 4096;
inline constexpr std::uint64_t kReferenceSeed = 0x5245464552454E43ULL;

struct ExperimentConfig {
  std::string sampler_spec;
  Metric metric;
  std::vector<std::size_t> n_schedule;
  int trials = 1;
  std::uint64_t master_seed = 0;
  SrwOptions srw;
  int threads = 1;
  /// Continuous samplers are compared against a fixed empirical proxy.
  std::size_t reference_size = kReferenceSize;
  std::uint64_t reference_seed = kReferenceSeed;
  /// Record wall-clock times. Off by default so reports are byte-stable.
  bool record_time = false;

  /// Throws InvalidArgument on an empty or non-increasing schedule, trials < 1, ...
  void validate() const;
};

/// Per-trial stream key: a pure function of (master_seed, n, trial).
std::uint64_t trial_seed(std::uint64_t master_seed, std::size_t n, int trial);

struct RateRow {
  std::size_t n = 0;
  int trials = 0;
  double mean_dist = 0.0;
  double std_err = 0.0;
  double mean_sq_dist = 0.0;
  double upper_curve = 0.0;  // NaN for n < 3
  double lower_curve = 0.0;
  double fitted_C_upper = 0.0;
  double fitted_c_lower = 0.0;
  double wall_time_s = 0.0;
  std::uint64_t seed = 0;
  // SRW metrics only: mean certified gap and mean lower bound on the square.
  double mean_gap = 0.0;
  double mean_sq_lower = 0.0;

  /// sqrt(mean_sq_dist): the estimate of (E d^2)^{1/2}.
  double mean_root() const;
};

struct RateReport {
  ExperimentConfig config;
  std::vector<RateRow> rows;
  bool reference_is_proxy = false;
  std::size_t reference_size = 0;
  std::vector<std::vector<double>> distances;  // [row][trial]
};

RateReport run_rate_experiment(const ExperimentConfig& cfg);

enum class RateCurve { Upper, Lower };

/// Upper: max_n mean_root / upper_curve(n). Lower: min_n mean_root * sqrt(ln n).
/// Rows with n < 3 are skipped.
double fit_rate_constant(const RateReport& report, RateCurve curve);

inline const char* kRateCsvHeader =
    "n,trials,mean_dist,std_err,mean_sq_dist,upper_curve,lower_curve,fitted_C_upper,"
    "fitted_c_lower,wall_time_s,seed";

void write_rate_csv(const RateReport& report, std::ostream& out);
Json rate_report_to_json(const RateReport& report);
Json config_to_json(const ExperimentConfig& cfg);

struct LowerBoundTrial {
  double w1 = 0.0;
  double w2 = 0.0;
  double s1 = 0.0;
  double separated_bound = 0.0;
};

struct Summary {
  double mean = 0.0;
  double std_err = 0.0;
};

Summary summarize(const std::vector<double>& values);

struct LowerBoundReport {
  std::size_t n = 0;
  int dim = 0;
  int trials = 0;
  std::vector<LowerBoundTrial> per_trial;
  Summary w1, w2, s1, separated_bound;
  /// Trials where W2 >= W1 >= bound fails by more than 1e-9.
  int chain_violations = 0;
};

/// mu = worst_case_measure(n); per trial mu_n = n draws from mu.
LowerBoundReport run_lower_bound_experiment(std::size_t n, int trials, std::uint64_t master_seed,
                                            const SrwOptions& srw = {}, int threads = 1);

struct CovarianceRow {
  std::size_t n = 0;
  double mean_opnorm_sum = 0.0;
  double std_err = 0.0;
  double two_n_sigma_opnorm = 0.0;
  double residual_over_logn = 0.0;
};

struct CovarianceReport {
  double sigma_opnorm = 0.0;
  bool sigma_is_plugin = false;
  std::vector<CovarianceRow> rows;
};

/// ||sum_i x_i x_i^T||_op for the rows x_i of `samples`.
double sample_covariance_opnorm(const Matrix& samples);

inline constexpr std::size_t kPluginSamples = 100000;

CovarianceReport run_covariance_experiment(const Sampler& sampler,
                                           const std::vector<std::size_t>& n_schedule, int trials,
                                           double radius, std::uint64_t master_seed,
                                           int threads = 1);

struct DecompositionTrial {
  double total = 0.0;        // S1(mu, mu_n)
  double head = 0.0;         // S1(mu, P#mu)
  double middle = 0.0;       // S1(P#mu, P#mu_n)
  double tail = 0.0;         // S1(P#mu_n, mu_n)
  double triangle_slack = 0.0;  // head + middle + tail - total
};

struct DecompositionReport {
  std::size_t n = 0;
  int t = 0;
  Vector spectrum;  // eigenvalues of Sigma(mu), descending
  double sqrt_lambda_next = 0.0;  // sqrt(lambda_{t+1})
  std::vector<DecompositionTrial> per_trial;
  Summary total, head, middle, tail;
  int triangle_violations = 0;  // slack < -1e-3
  bool head_bound_ok = false;   // head <= sqrt(lambda_{t+1}) + 1e-4
  bool trace_bound_ok = false;  // lambda_t <= 1/t
};

/// Three-term split of S1(mu, mu_n) through the top-t eigenprojector of
/// Sigma(mu). t defaults to t_star(n).
DecompositionReport run_decomposition_experiment(const DiscreteMeasure& mu, std::size_t n,
                                                 int trials, std::uint64_t master_seed,
                                                 std::optional<int> t = std::nullopt,
                                                 const SrwOptions& srw = {}, int threads = 1);

/// "0.1.0+g<hash>" when built from a git checkout.
std::string version_string();

}  // namespace srwrate
