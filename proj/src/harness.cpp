#include "srwrate/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <exception>
#include <functional>
#include <limits>
#include <mutex>
#include <ostream>
#include <thread>

#include "srwrate/bounds.hpp"
#include "srwrate/errors.hpp"
#include "srwrate/ot.hpp"
#include "srwrate_version.hpp"

namespace srwrate {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr std::uint64_t kConstructionTag = 0x434F4E5354ULL;
constexpr std::uint64_t kPluginTag = 0x504C5547ULL;

// Runs fn(0..count-1) on up to `threads` workers. If any call throws, the
// exception of the smallest failing index is rethrown, so the error reported
// does not depend on scheduling.
void parallel_for(std::size_t count, int threads, const std::function<void(std::size_t)>& fn) {
  const std::size_t workers =
      std::min<std::size_t>(count, static_cast<std::size_t>(std::max(1, threads)));
  std::vector<std::exception_ptr> errors(count);
  std::atomic<std::size_t> next{0};
  std::atomic<bool> failed{false};
  auto work = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= count || failed.load()) return;
      try {
        fn(i);
      } catch (...) {
        errors[i] = std::current_exception();
        failed.store(true);
      }
    }
  };
  if (workers <= 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(work);
    for (auto& t : pool) t.join();
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

std::string context(std::size_t n, int trial) {
  return "n=" + std::to_string(n) + " trial=" + std::to_string(trial) + ": ";
}

template <class F>
auto with_context(std::size_t n, int trial, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const NumericalError& e) {
    throw NumericalError(context(n, trial) + e.what());
  } catch (const InvalidArgument& e) {
    throw InvalidArgument(context(n, trial) + e.what());
  } catch (const std::exception& e) {
    throw Error(context(n, trial) + e.what());
  }
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

Json srw_to_json(const SrwOptions& o) {
  Json j;
  j["tol"] = o.tol;
  j["max_iters"] = o.max_iters;
  j["method"] = o.method == SrwMethod::Auto           ? "auto"
                : o.method == SrwMethod::FrankWolfe ? "frank-wolfe"
                                                    : "interior-point";
  j["linearization"] = o.linearization == SrwLinearization::Projector ? "projector" : "smoothed";
  j["step"] = o.step == SrwStep::Standard ? "standard" : "line-search";
  return j;
}

bool is_srw(const Metric& m) { return m.kind == MetricKind::S1 || m.kind == MetricKind::Sk; }

// Uniform counts over the atoms of a finite support, as a measure on it.
DiscreteMeasure empirical_on_support(const Matrix& support, std::size_t n, std::uint64_t seed) {
  const auto m = static_cast<std::uint64_t>(support.rows());
  Vector counts = Vector::Zero(support.rows());
  CounterRng rng(seed);
  for (std::size_t i = 0; i < n; ++i) counts[static_cast<Eigen::Index>(rng.below(m))] += 1.0;
  return DiscreteMeasure(support, counts / static_cast<double>(n));
}

}  // namespace

Metric Metric::parse(const std::string& name, int k) {
  Metric m;
  if (name == "w1") {
    m.kind = MetricKind::W1;
  } else if (name == "w2") {
    m.kind = MetricKind::W2;
  } else if (name == "s1") {
    m.kind = MetricKind::S1;
  } else if (name == "sk" || name.rfind("sk:", 0) == 0) {
    m.kind = MetricKind::Sk;
    m.k = k;
    if (name.size() > 3) {
      try {
        std::size_t used = 0;
        m.k = std::stoi(name.substr(3), &used);
        if (used != name.size() - 3) throw std::invalid_argument(name);
      } catch (const std::exception&) {
        throw InvalidArgument("bad metric '" + name + "'");
      }
    }
    if (m.k < 1) throw InvalidArgument("metric sk needs k >= 1");
  } else {
    throw InvalidArgument("unknown metric '" + name + "' (expected w1, w2, s1, sk)");
  }
  return m;
}

std::string Metric::name() const {
  switch (kind) {
    case MetricKind::W1: return "w1";
    case MetricKind::W2: return "w2";
    case MetricKind::S1: return "s1";
    case MetricKind::Sk: return "sk:" + std::to_string(k);
  }
  return "?";
}

double evaluate_metric(const Metric& metric, const DiscreteMeasure& mu, const DiscreteMeasure& nu,
                       const SrwOptions& srw, SrwResult* detail) {
  switch (metric.kind) {
    case MetricKind::W1: return wasserstein(mu, nu, 1);
    case MetricKind::W2: return wasserstein(mu, nu, 2);
    case MetricKind::S1:
    case MetricKind::Sk: {
      SrwResult r = srw_distance(mu, nu, metric.kind == MetricKind::S1 ? 1 : metric.k, srw);
      const double d = r.distance;
      if (detail) *detail = std::move(r);
      return d;
    }
  }
  throw InvalidArgument("unknown metric");
}

void ExperimentConfig::validate() const {
  if (sampler_spec.empty()) throw InvalidArgument("sampler spec is empty");
  if (n_schedule.empty()) throw InvalidArgument("n schedule is empty");
  for (std::size_t i = 0; i < n_schedule.size(); ++i) {
    if (n_schedule[i] < 1) throw InvalidArgument("n schedule entries must be >= 1");
    if (i > 0 && n_schedule[i] <= n_schedule[i - 1]) {
      throw InvalidArgument("n schedule must be strictly increasing");
    }
  }
  if (trials < 1) throw InvalidArgument("trials must be >= 1");
  if (threads < 1) throw InvalidArgument("threads must be >= 1");
  if (metric.kind == MetricKind::Sk && metric.k < 1) throw InvalidArgument("k must be >= 1");
  if (reference_size < 1) throw InvalidArgument("reference size must be >= 1");
  if (!(srw.tol > 0.0)) throw InvalidArgument("srw tol must be positive");
  if (srw.max_iters < 1) throw InvalidArgument("srw max_iters must be >= 1");
}

std::uint64_t trial_seed(std::uint64_t master_seed, std::size_t n, int trial) {
  return derive_seed(master_seed, {static_cast<std::uint64_t>(n), static_cast<std::uint64_t>(trial)});
}

double RateRow::mean_root() const { return std::sqrt(mean_sq_dist); }

Summary summarize(const std::vector<double>& values) {
  Summary s;
  if (values.empty()) return s;
  long double sum = 0.0L;
  for (double v : values) sum += v;
  s.mean = static_cast<double>(sum / values.size());
  if (values.size() > 1) {
    long double ss = 0.0L;
    for (double v : values) ss += (v - s.mean) * static_cast<long double>(v - s.mean);
    const double var = static_cast<double>(ss / (values.size() - 1));
    s.std_err = std::sqrt(var / static_cast<double>(values.size()));
  }
  return s;
}

RateReport run_rate_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  const Sampler sampler = Sampler::parse(cfg.sampler_spec, cfg.master_seed);
  if (cfg.metric.kind == MetricKind::Sk && cfg.metric.k > sampler.dim()) {
    throw InvalidArgument("k exceeds the sampler dimension");
  }

  RateReport report;
  report.config = cfg;
  std::optional<DiscreteMeasure> proxy;
  if (!sampler.truth()) {
    proxy = sample_empirical(sampler.with_seed(cfg.reference_seed), cfg.reference_size);
    report.reference_is_proxy = true;
  }
  const DiscreteMeasure& reference = proxy ? *proxy : *sampler.truth();
  report.reference_size = static_cast<std::size_t>(reference.size());

  SrwOptions srw = cfg.srw;
  srw.keep_coupling = false;

  const std::size_t rows = cfg.n_schedule.size();
  const auto trials = static_cast<std::size_t>(cfg.trials);
  std::vector<double> dist(rows * trials), gap(rows * trials, 0.0), lower(rows * trials, 0.0),
      elapsed(rows * trials, 0.0);

  parallel_for(rows * trials, cfg.threads, [&](std::size_t task) {
    const std::size_t n = cfg.n_schedule[task / trials];
    const int trial = static_cast<int>(task % trials);
    with_context(n, trial, [&] {
      const auto t0 = std::chrono::steady_clock::now();
      const DiscreteMeasure sample =
          sample_empirical(sampler.with_seed(trial_seed(cfg.master_seed, n, trial)), n);
      SrwResult detail;
      const double d = evaluate_metric(cfg.metric, reference, sample, srw, &detail);
      if (!std::isfinite(d)) throw NumericalError("non-finite distance");
      dist[task] = d;
      if (is_srw(cfg.metric)) {
        gap[task] = detail.fw_gap;
        lower[task] = detail.lower_bound;
      }
      elapsed[task] = seconds_since(t0);
    });
  });

  report.distances.assign(rows, {});
  for (std::size_t r = 0; r < rows; ++r) {
    RateRow row;
    row.n = cfg.n_schedule[r];
    row.trials = cfg.trials;
    row.seed = cfg.master_seed;
    std::vector<double> ds(dist.begin() + r * trials, dist.begin() + (r + 1) * trials);
    const Summary s = summarize(ds);
    row.mean_dist = s.mean;
    row.std_err = s.std_err;
    long double sq = 0.0L, g = 0.0L, lo = 0.0L, wall = 0.0L;
    for (std::size_t t = 0; t < trials; ++t) {
      sq += ds[t] * static_cast<long double>(ds[t]);
      g += gap[r * trials + t];
      lo += lower[r * trials + t];
      wall += elapsed[r * trials + t];
    }
    row.mean_sq_dist = static_cast<double>(sq / trials);
    row.mean_gap = static_cast<double>(g / trials);
    row.mean_sq_lower = static_cast<double>(lo / trials);
    row.wall_time_s = cfg.record_time ? static_cast<double>(wall) : 0.0;
    if (row.n >= 3) {
      const RateCurves c = rate_curves(static_cast<double>(row.n));
      row.upper_curve = c.upper;
      row.lower_curve = c.lower;
    } else {
      row.upper_curve = kNaN;
      row.lower_curve = kNaN;
    }
    report.rows.push_back(row);
    report.distances[r] = std::move(ds);
  }
  const double cu = fit_rate_constant(report, RateCurve::Upper);
  const double cl = fit_rate_constant(report, RateCurve::Lower);
  for (auto& row : report.rows) {
    row.fitted_C_upper = cu;
    row.fitted_c_lower = cl;
  }
  return report;
}

double fit_rate_constant(const RateReport& report, RateCurve curve) {
  if (report.rows.empty()) throw InvalidArgument("cannot fit a rate constant to an empty report");
  double best = kNaN;
  for (const auto& row : report.rows) {
    if (row.n < 3) continue;
    const RateCurves c = rate_curves(static_cast<double>(row.n));
    const double v = curve == RateCurve::Upper ? row.mean_root() / c.upper : row.mean_root() / c.lower;
    if (std::isnan(best)) {
      best = v;
    } else {
      best = curve == RateCurve::Upper ? std::max(best, v) : std::min(best, v);
    }
  }
  return best;
}

void write_rate_csv(const RateReport& report, std::ostream& out) {
  out << kRateCsvHeader << '\n';
  for (const auto& r : report.rows) {
    out << r.n << ',' << r.trials << ',' << format_double(r.mean_dist) << ','
        << format_double(r.std_err) << ',' << format_double(r.mean_sq_dist) << ','
        << format_double(r.upper_curve) << ',' << format_double(r.lower_curve) << ','
        << format_double(r.fitted_C_upper) << ',' << format_double(r.fitted_c_lower) << ','
        << format_double(r.wall_time_s) << ',' << r.seed << '\n';
  }
}

Json config_to_json(const ExperimentConfig& cfg) {
  Json j;
  j["sampler"] = cfg.sampler_spec;
  j["metric"] = cfg.metric.name();
  j["n_schedule"] = cfg.n_schedule;
  j["trials"] = cfg.trials;
  j["seed"] = cfg.master_seed;
  j["threads"] = cfg.threads;
  j["reference_size"] = cfg.reference_size;
  j["reference_seed"] = cfg.reference_seed;
  j["record_time"] = cfg.record_time;
  j["srw"] = srw_to_json(cfg.srw);
  return j;
}

Json rate_report_to_json(const RateReport& report) {
  Json meta;
  meta["version"] = version_string();
  meta["config"] = config_to_json(report.config);
  meta["reference"] = {{"proxy", report.reference_is_proxy}, {"size", report.reference_size}};
  Json rows = Json::array();
  for (const auto& r : report.rows) {
    Json row;
    row["n"] = r.n;
    row["trials"] = r.trials;
    row["mean_dist"] = r.mean_dist;
    row["std_err"] = r.std_err;
    row["mean_sq_dist"] = r.mean_sq_dist;
    row["upper_curve"] = r.upper_curve;
    row["lower_curve"] = r.lower_curve;
    row["fitted_C_upper"] = r.fitted_C_upper;
    row["fitted_c_lower"] = r.fitted_c_lower;
    row["wall_time_s"] = r.wall_time_s;
    row["seed"] = r.seed;
    if (is_srw(report.config.metric)) {
      row["mean_gap"] = r.mean_gap;
      row["mean_sq_lower_bound"] = r.mean_sq_lower;
    }
    rows.push_back(std::move(row));
  }
  Json j;
  j["metadata"] = std::move(meta);
  j["rows"] = std::move(rows);
  return j;
}

LowerBoundReport run_lower_bound_experiment(std::size_t n, int trials, std::uint64_t master_seed,
                                            const SrwOptions& srw, int threads) {
  if (n < 3) throw InvalidArgument("lower-bound experiment needs n >= 3");
  if (trials < 1) throw InvalidArgument("trials must be >= 1");
  const SeparatedSet set = worst_case_support(n, derive_seed(master_seed, {kConstructionTag, n}));
  const DiscreteMeasure mu = DiscreteMeasure::uniform(set.points);
  SrwOptions opts = srw;
  opts.keep_coupling = false;

  LowerBoundReport rep;
  rep.n = n;
  rep.dim = set.dim;
  rep.trials = trials;
  rep.per_trial.resize(static_cast<std::size_t>(trials));
  parallel_for(rep.per_trial.size(), threads, [&](std::size_t i) {
    const int trial = static_cast<int>(i);
    with_context(n, trial, [&] {
      const DiscreteMeasure mun = empirical_on_support(set.points, n, trial_seed(master_seed, n, trial));
      LowerBoundTrial& t = rep.per_trial[i];
      t.w1 = wasserstein(mu, mun, 1);
      t.w2 = wasserstein(mu, mun, 2);
      t.s1 = srw_distance(mu, mun, 1, opts).distance;
      t.separated_bound = separated_w1_lower_bound(set, mu.weights(), mun.weights());
    });
  });

  std::vector<double> w1, w2, s1, sb;
  for (const auto& t : rep.per_trial) {
    w1.push_back(t.w1);
    w2.push_back(t.w2);
    s1.push_back(t.s1);
    sb.push_back(t.separated_bound);
    if (t.w2 < t.w1 - 1e-9 || t.w1 < t.separated_bound - 1e-9) ++rep.chain_violations;
  }
  rep.w1 = summarize(w1);
  rep.w2 = summarize(w2);
  rep.s1 = summarize(s1);
  rep.separated_bound = summarize(sb);
  return rep;
}

double sample_covariance_opnorm(const Matrix& samples) {
  // The nonzero spectra of X^T X and X X^T coincide; use the smaller one.
  const Matrix gram = samples.rows() < samples.cols() ? Matrix(samples * samples.transpose())
                                                       : Matrix(samples.transpose() * samples);
  if (gram.size() == 0) return 0.0;
  Eigen::SelfAdjointEigenSolver<Matrix> eig(gram, Eigen::EigenvaluesOnly);
  if (eig.info() != Eigen::Success) throw NumericalError("eigensolver failed");
  return std::max(0.0, eig.eigenvalues().maxCoeff());
}

CovarianceReport run_covariance_experiment(const Sampler& sampler,
                                           const std::vector<std::size_t>& n_schedule, int trials,
                                           double radius, std::uint64_t master_seed, int threads) {
  if (n_schedule.empty()) throw InvalidArgument("n schedule is empty");
  for (std::size_t n : n_schedule) {
    if (n < 3) throw InvalidArgument("covariance experiment needs n >= 3");
  }
  if (trials < 1) throw InvalidArgument("trials must be >= 1");
  if (!(radius > 0.0)) throw InvalidArgument("radius must be positive");

  CovarianceReport rep;
  Matrix sigma;
  if (sampler.truth()) {
    sigma = sampler.truth()->second_moment();
  } else {
    const Matrix x =
        sample_empirical(sampler.with_seed(derive_seed(kReferenceSeed, {kPluginTag})), kPluginSamples)
            .points();
    sigma = x.transpose() * x / static_cast<double>(x.rows());
    rep.sigma_is_plugin = true;
  }
  rep.sigma_opnorm = max_eigenvalue(SymmetricMatrix(0.5 * (sigma + sigma.transpose())));

  const auto nt = static_cast<std::size_t>(trials);
  std::vector<double> values(n_schedule.size() * nt);
  parallel_for(values.size(), threads, [&](std::size_t task) {
    const std::size_t n = n_schedule[task / nt];
    const int trial = static_cast<int>(task % nt);
    with_context(n, trial, [&] {
      const Matrix x =
          sample_empirical(sampler.with_seed(trial_seed(master_seed, n, trial)), n).points();
      values[task] = sample_covariance_opnorm(x);
    });
  });

  for (std::size_t r = 0; r < n_schedule.size(); ++r) {
    CovarianceRow row;
    row.n = n_schedule[r];
    const Summary s = summarize(std::vector<double>(values.begin() + r * nt, values.begin() + (r + 1) * nt));
    row.mean_opnorm_sum = s.mean;
    row.std_err = s.std_err;
    row.two_n_sigma_opnorm = 2.0 * static_cast<double>(row.n) * rep.sigma_opnorm;
    row.residual_over_logn = (row.mean_opnorm_sum - row.two_n_sigma_opnorm) /
                             (radius * radius * std::log(static_cast<double>(row.n)));
    rep.rows.push_back(row);
  }
  return rep;
}

DecompositionReport run_decomposition_experiment(const DiscreteMeasure& mu, std::size_t n,
                                                 int trials, std::uint64_t master_seed,
                                                 std::optional<int> t, const SrwOptions& srw,
                                                 int threads) {
  if (n < 1) throw InvalidArgument("n must be >= 1");
  if (trials < 1) throw InvalidArgument("trials must be >= 1");
  const int dim = static_cast<int>(mu.dim());
  int tt = 0;
  if (t) {
    tt = *t;
  } else {
    if (n < 3) throw InvalidArgument("default t needs n >= 3");
    tt = static_cast<int>(t_star(static_cast<double>(n)).t);
  }
  if (tt < 1) throw InvalidArgument("t must be >= 1");
  tt = std::min(tt, dim);

  SrwOptions opts = srw;
  opts.keep_coupling = false;

  DecompositionReport rep;
  rep.n = n;
  rep.t = tt;
  const SpectralDecomposition eig = jacobi_eigen(SymmetricMatrix(mu.second_moment()));
  rep.spectrum = eig.eigenvalues;
  rep.sqrt_lambda_next = tt < dim ? std::sqrt(std::max(0.0, eig.eigenvalues[tt])) : 0.0;
  rep.trace_bound_ok = eig.eigenvalues[tt - 1] <= 1.0 / tt + 1e-12;

  const Matrix basis = eig.eigenvectors.leftCols(tt);
  const DiscreteMeasure p_mu = project_measure(mu, basis);
  // P#mu and P#mu_n compared in the t coordinates of span(basis).
  const DiscreteMeasure p_mu_low(mu.points() * basis, mu.weights());
  const double head = s1_distance(mu, p_mu, opts).distance;
  rep.head_bound_ok = head <= rep.sqrt_lambda_next + 1e-4;

  const Sampler sampler = Sampler::finite(mu, master_seed);
  rep.per_trial.resize(static_cast<std::size_t>(trials));
  parallel_for(rep.per_trial.size(), threads, [&](std::size_t i) {
    const int trial = static_cast<int>(i);
    with_context(n, trial, [&] {
      const DiscreteMeasure mun =
          sample_empirical(sampler.with_seed(trial_seed(master_seed, n, trial)), n);
      DecompositionTrial& d = rep.per_trial[i];
      d.head = head;
      d.total = s1_distance(mu, mun, opts).distance;
      d.middle =
          s1_distance(p_mu_low, DiscreteMeasure(mun.points() * basis, mun.weights()), opts).distance;
      d.tail = s1_distance(project_measure(mun, basis), mun, opts).distance;
      d.triangle_slack = d.head + d.middle + d.tail - d.total;
    });
  });

  std::vector<double> tot, hd, mid, tl;
  for (const auto& d : rep.per_trial) {
    tot.push_back(d.total);
    hd.push_back(d.head);
    mid.push_back(d.middle);
    tl.push_back(d.tail);
    if (d.triangle_slack < -1e-3) ++rep.triangle_violations;
  }
  rep.total = summarize(tot);
  rep.head = summarize(hd);
  rep.middle = summarize(mid);
  rep.tail = summarize(tl);
  return rep;
}

std::string version_string() { return SRWRATE_VERSION_STRING; }

}  // namespace srwrate
