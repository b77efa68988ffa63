#include <cmath>
#include <limits>
#include <sstream>

#include <doctest.h>

#include "srwrate/bounds.hpp"
#include "srwrate/errors.hpp"
#include "srwrate/harness.hpp"
#include "srwrate/io.hpp"

using namespace srwrate;

namespace {

ExperimentConfig small_config(std::string spec, std::string metric) {
  ExperimentConfig c;
  c.sampler_spec = std::move(spec);
  c.metric = Metric::parse(metric, 1);
  c.n_schedule = {4, 8, 16};
  c.trials = 3;
  c.master_seed = 5;
  c.reference_size = 64;
  c.srw.tol = 1e-4;
  c.srw.max_iters = 200;
  return c;
}

}  // namespace

TEST_CASE("single-atom truth gives zero distance") {
  Matrix a(1, 2);
  a << 0.3, 0.1;
  const auto path = std::filesystem::temp_directory_path() / "srwrate_atom.json";
  save_measure(DiscreteMeasure::uniform(a), path);
  ExperimentConfig c = small_config("file:" + path.string(), "w2");
  c.n_schedule = {1};
  c.trials = 1;
  const auto r = run_rate_experiment(c);
  REQUIRE(r.rows.size() == 1);
  CHECK(r.rows[0].mean_dist == 0.0);
  CHECK(std::isnan(r.rows[0].upper_curve));
  CHECK_FALSE(r.reference_is_proxy);
  std::filesystem::remove(path);
}

TEST_CASE("rate experiment rows and reproducibility") {
  for (const char* metric : {"w1", "w2", "s1"}) {
    ExperimentConfig c = small_config("uniform-ball:d=3", metric);
    const auto a = run_rate_experiment(c);
    REQUIRE(a.rows.size() == 3);
    CHECK(a.reference_is_proxy);
    for (std::size_t i = 0; i < a.rows.size(); ++i) {
      const auto& row = a.rows[i];
      CHECK(row.n == c.n_schedule[i]);
      CHECK(row.std_err >= 0.0);
      CHECK(row.mean_dist > 0.0);
      CHECK(row.mean_sq_dist >= row.mean_dist * row.mean_dist - 1e-12);
      CHECK(row.mean_root() == doctest::Approx(std::sqrt(row.mean_sq_dist)));
      CHECK(row.wall_time_s == 0.0);
      CHECK(row.seed == c.master_seed);
    }
    c.threads = 2;
    const auto b = run_rate_experiment(c);
    std::ostringstream sa, sb;
    write_rate_csv(a, sa);
    write_rate_csv(b, sb);
    CHECK(sa.str() == sb.str());
    CHECK(dump_json(rate_report_to_json(a)["rows"]) == dump_json(rate_report_to_json(b)["rows"]));
  }
}

TEST_CASE("rate constant fit") {
  RateReport r;
  for (std::size_t n : {8, 64, 512}) {
    RateRow row;
    row.n = n;
    const auto c = rate_curves(static_cast<double>(n));
    row.upper_curve = c.upper;
    row.lower_curve = c.lower;
    row.mean_sq_dist = c.upper * c.upper;
    r.rows.push_back(row);
  }
  CHECK(fit_rate_constant(r, RateCurve::Upper) == doctest::Approx(1.0));
  for (auto& row : r.rows) row.mean_sq_dist *= 4;
  CHECK(fit_rate_constant(r, RateCurve::Upper) == doctest::Approx(2.0));
  double expect = INFINITY;
  for (const auto& row : r.rows) expect = std::min(expect, row.mean_root() * std::sqrt(std::log(row.n)));
  CHECK(fit_rate_constant(r, RateCurve::Lower) == doctest::Approx(expect));
  CHECK_THROWS_AS(fit_rate_constant(RateReport{}, RateCurve::Upper), InvalidArgument);
}

TEST_CASE("config validation") {
  ExperimentConfig c = small_config("uniform-ball:d=3", "w2");
  c.n_schedule = {8, 4};
  CHECK_THROWS_AS(c.validate(), InvalidArgument);
  c.n_schedule = {4, 8};
  c.trials = 0;
  CHECK_THROWS_AS(c.validate(), InvalidArgument);
  CHECK_THROWS_AS(Metric::parse("w3", 1), InvalidArgument);
  CHECK(Metric::parse("sk:3", 1).k == 3);
}

TEST_CASE("lower bound chain holds per trial") {
  SrwOptions o;
  o.tol = 1e-4;
  const auto r = run_lower_bound_experiment(20, 4, 3, o, 1);
  CHECK(r.dim == 3);
  CHECK(r.per_trial.size() == 4);
  CHECK(r.chain_violations == 0);
  for (const auto& t : r.per_trial) {
    CHECK(t.w2 >= t.w1 - 1e-12);
    CHECK(t.w1 >= t.separated_bound - 1e-12);
    CHECK(t.s1 >= t.w2 / std::sqrt(3.0) - 1e-6);
  }
}

TEST_CASE("sample covariance") {
  SUBCASE("single sample: operator norm is the squared norm") {
    Matrix x(1, 3);
    x << 0.3, -0.4, 0.5;
    CHECK(sample_covariance_opnorm(x) == doctest::Approx(x.squaredNorm()));
  }
  SUBCASE("finite law on e1 is deterministic") {
    Matrix e1 = Matrix::Zero(1, 3);
    e1(0, 0) = 1;
    const auto s = Sampler::finite(DiscreteMeasure::uniform(e1), 1);
    const auto rep = run_covariance_experiment(s, {4, 16}, 3, 1.0, 2, 1);
    CHECK_FALSE(rep.sigma_is_plugin);
    for (const auto& row : rep.rows) {
      CHECK(row.mean_opnorm_sum == doctest::Approx(row.n));
      CHECK(row.two_n_sigma_opnorm == doctest::Approx(2.0 * row.n));
      CHECK(row.residual_over_logn < 0.0);
    }
  }
  CHECK_THROWS_AS(run_covariance_experiment(Sampler::uniform_ball(2, 1), {2}, 1, 1.0, 1, 1), InvalidArgument);
}

TEST_CASE("decomposition on a low-dimensional measure") {
  // support inside span(e1, e2) of R^4: P covers it for t = 2
  auto pts = sample_empirical(Sampler::uniform_ball(2, 3), 12).points();
  Matrix padded = Matrix::Zero(12, 4);
  padded.leftCols(2) = pts;
  const auto mu = DiscreteMeasure::uniform(padded);
  SrwOptions o;
  o.tol = 1e-6;
  const auto rep = run_decomposition_experiment(mu, 8, 2, 4, 2, o, 1);
  CHECK(rep.t == 2);
  CHECK(rep.triangle_violations == 0);
  CHECK(rep.head_bound_ok);
  CHECK(rep.trace_bound_ok);
  for (const auto& t : rep.per_trial) CHECK(t.head == doctest::Approx(0.0).epsilon(1e-6));
}
