// Acceptance suite: one line per criterion, exit status 0 iff all pass.
// Usage: acceptance [--cli PATH] [criterion numbers...]

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <iostream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "srwrate/bounds.hpp"
#include "srwrate/harness.hpp"
#include "srwrate/io.hpp"
#include "srwrate/measures.hpp"
#include "srwrate/ot.hpp"
#include "srwrate/srw.hpp"

using namespace srwrate;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(double x, int digits = 6) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*g", digits, x);
  return buf;
}

Vector ball_point(CounterRng& rng, int d, double radius = 1.0) {
  Vector v(d);
  for (int i = 0; i < d; ++i) v[i] = rng.normal();
  return v.normalized() * (radius * std::pow(rng.uniform(), 1.0 / d));
}

DiscreteMeasure random_measure(CounterRng& rng, int n, int d) {
  Matrix p(n, d);
  Vector w(n);
  for (int i = 0; i < n; ++i) {
    p.row(i) = ball_point(rng, d).transpose();
    w[i] = 0.1 + rng.uniform();
  }
  return DiscreteMeasure(p, w / w.sum());
}

int uniform_int(CounterRng& rng, int lo, int hi) {
  return lo + static_cast<int>(rng.below(static_cast<std::uint64_t>(hi - lo + 1)));
}

double max_eig_2x2(const Matrix& v) {
  const double tr = v(0, 0) + v(1, 1);
  const double det = v(0, 0) * v(1, 1) - v(0, 1) * v(1, 0);
  return 0.5 * (tr + std::sqrt(std::max(0.0, tr * tr - 4.0 * det)));
}

std::string g_cli;

Outcome collinear() {
  CounterRng rng(101);
  double worst = 0.0;
  for (int rep = 0; rep < 100; ++rep) {
    const int d = uniform_int(rng, 2, 5);
    const Vector base = ball_point(rng, d, 0.3);
    const Vector dir = ball_point(rng, d).normalized();
    auto line = [&](int n) {
      Matrix p(n, d);
      Vector w(n);
      for (int i = 0; i < n; ++i) {
        p.row(i) = (base + (1.2 * rng.uniform() - 0.6) * dir).transpose();
        w[i] = 0.1 + rng.uniform();
      }
      return DiscreteMeasure(p, w / w.sum());
    };
    const DiscreteMeasure a = line(uniform_int(rng, 1, 20));
    const DiscreteMeasure b = line(uniform_int(rng, 1, 20));
    worst = std::max(worst, std::abs(s1_distance(a, b).distance - quantile_w2_1d(a, b)));
  }
  return {worst <= 1e-5, "max |S1 - quantile W2| = " + fmt(worst)};
}

Outcome sandwich() {
  CounterRng rng(202);
  double worst = -INFINITY;
  for (int rep = 0; rep < 200; ++rep) {
    const int d = uniform_int(rng, 2, 8);
    const DiscreteMeasure a = random_measure(rng, uniform_int(rng, 1, 15), d);
    const DiscreteMeasure b = random_measure(rng, uniform_int(rng, 1, 15), d);
    const double w2 = wasserstein(a, b, 2);
    const double s1 = s1_distance(a, b).distance;
    worst = std::max(worst, w2 / std::sqrt(d) - (s1 + 1e-3));
    worst = std::max(worst, s1 - (w2 + 1e-3));
    for (int k = 2; k <= d; ++k) {
      const double sk = srw_distance(a, b, k).distance;
      worst = std::max(worst, s1 - (sk + 1e-3));
      worst = std::max(worst, sk + 1e-3 - (std::sqrt(k) * s1 + 2e-3));
    }
  }
  return {worst <= 0.0, "worst violation margin = " + fmt(worst)};
}

Outcome antipodal() {
  Matrix a(2, 2), b(2, 2);
  a << 1, 0, -1, 0;
  b << 0, 1, 0, -1;
  const DiscreteMeasure mu = DiscreteMeasure::uniform(a), nu = DiscreteMeasure::uniform(b);
  const double s1 = s1_distance(mu, nu).distance;
  const double w2 = wasserstein(mu, nu, 2);
  return {std::abs(s1 - 1.0) <= 1e-3 && std::abs(w2 - std::sqrt(2.0)) <= 1e-9,
          "S1 = " + fmt(s1, 12) + ", W2 - sqrt2 = " + fmt(w2 - std::sqrt(2.0))};
}

Outcome grid_oracle() {
  CounterRng rng(404);
  SrwOptions fw;
  fw.method = SrwMethod::FrankWolfe;
  double worst = 0.0;
  for (int rep = 0; rep < 50; ++rep) {
    Matrix a(2, 2), b(2, 2);
    for (int i = 0; i < 2; ++i) {
      a.row(i) = ball_point(rng, 2).transpose();
      b.row(i) = ball_point(rng, 2).transpose();
    }
    const DiscreteMeasure mu = DiscreteMeasure::uniform(a), nu = DiscreteMeasure::uniform(b);
    const GridResult g = brute_coupling_grid(
        mu, nu,
        [&](const Matrix& plan) {
          Matrix v = Matrix::Zero(2, 2);
          for (int i = 0; i < 2; ++i) {
            for (int j = 0; j < 2; ++j) {
              const Eigen::Vector2d dlt = (a.row(i) - b.row(j)).transpose();
              v += plan(i, j) * dlt * dlt.transpose();
            }
          }
          return max_eig_2x2(v);
        },
        10000);
    worst = std::max(worst, std::abs(s1_distance(mu, nu, fw).objective() - g.best_value));
  }
  return {worst <= 1e-4, "max |FW S1^2 - grid min| = " + fmt(worst)};
}

Outcome ambient() {
  CounterRng rng(505);
  double worst = 0.0;
  for (int rep = 0; rep < 50; ++rep) {
    const DiscreteMeasure a = random_measure(rng, uniform_int(rng, 2, 10), 3);
    const DiscreteMeasure b = random_measure(rng, uniform_int(rng, 2, 10), 3);
    const std::uint64_t rot = 5000 + rep;
    const double s = s1_distance(a, b).distance;
    const double t = s1_distance(isometric_embed(a, 9, rot), isometric_embed(b, 9, rot)).distance;
    worst = std::max(worst, std::abs(s - t));
  }
  return {worst <= 1e-4, "max |delta S1| = " + fmt(worst)};
}

Outcome mad() {
  double worst = INFINITY;
  for (long n = 2; n <= 100; ++n) {
    for (long j = 1; j < n; ++j) {
      const MadResult m = mad_binomial(n, static_cast<double>(j) / static_cast<double>(n));
      worst = std::min(worst, m.mad - m.std / std::sqrt(2.0));
    }
  }
  const MadResult eq = mad_binomial(2, 0.5);
  const double eq_gap = std::abs(eq.mad - eq.std / std::sqrt(2.0));
  return {worst >= -1e-15 && eq_gap <= 1e-15,
          "min (mad - std/sqrt2) = " + fmt(worst) + ", gap at (2, 1/2) = " + fmt(eq_gap)};
}

Outcome packing() {
  std::string dims;
  bool ok = true;
  const int expect[] = {1, 3, 5, 7};
  int idx = 0;
  for (std::size_t n : {2u, 10u, 100u, 1000u}) {
    const SeparatedSet s = worst_case_support(n, 7);
    s.certify();
    ok = ok && s.dim == expect[idx++] && s.points.rows() == static_cast<Eigen::Index>(n) &&
         s.min_pairwise_distance() > 1.0 / 3.0;
    (void)worst_case_measure(n, 7);
    dims += (dims.empty() ? "" : ",") + std::to_string(s.dim);
  }
  return {ok, "d = {" + dims + "}"};
}

Outcome lower_bound() {
  const double target = 1.0 / (12.0 * std::sqrt(2.0));
  bool ok = true;
  std::string detail;
  for (std::size_t n : {20u, 50u, 100u}) {
    const LowerBoundReport r = run_lower_bound_experiment(n, 200, 808);
    ok = ok && r.w2.mean >= target - 2.0 * r.w2.std_err && r.chain_violations == 0;
    detail += "n=" + std::to_string(n) + ": W2 " + fmt(r.w2.mean, 5) + " (se " + fmt(r.w2.std_err, 2) +
              "), W1 " + fmt(r.w1.mean, 5) + ", S1 " + fmt(r.s1.mean, 5) + ", bound " +
              fmt(r.separated_bound.mean, 5) + ", chain violations " +
              std::to_string(r.chain_violations) + "; ";
  }
  return {ok, detail};
}

std::vector<std::size_t> powers_of_two(int lo, int hi) {
  std::vector<std::size_t> out;
  for (int e = lo; e <= hi; ++e) out.push_back(std::size_t{1} << e);
  return out;
}

Outcome upper_rate() {
  ExperimentConfig cfg;
  cfg.sampler_spec = "uniform-sphere:d=40";
  cfg.metric = Metric::parse("s1");
  cfg.n_schedule = powers_of_two(4, 11);
  cfg.trials = 20;
  cfg.master_seed = 909;
  cfg.srw.method = SrwMethod::FrankWolfe;
  cfg.srw.linearization = SrwLinearization::Projector;
  cfg.srw.step = SrwStep::Standard;
  cfg.srw.max_iters = 300;
  const RateReport rep = run_rate_experiment(cfg);
  double lo = INFINITY, hi = 0.0, lo_cert = INFINITY, hi_cert = 0.0;
  for (const auto& r : rep.rows) {
    const double ratio = r.mean_root() / r.upper_curve;
    lo = std::min(lo, ratio);
    hi = std::max(hi, ratio);
    const double cert = std::sqrt(std::max(0.0, r.mean_sq_lower)) / r.upper_curve;
    lo_cert = std::min(lo_cert, cert);
    hi_cert = std::max(hi_cert, cert);
  }
  const auto& first = rep.rows.front();
  const auto& last = rep.rows.back();
  return {hi / lo <= 4.0,
          "max/min ratio = " + fmt(hi / lo, 4) + " (mean_root " + fmt(first.mean_root(), 4) +
              " at n=16, " + fmt(last.mean_root(), 4) + " at n=2048; certified lower-bound ratio " +
              fmt(hi_cert / lo_cert, 4) + ")"};
}

Outcome w2_rate() {
  ExperimentConfig cfg;
  cfg.sampler_spec = "uniform-ball:d=5";
  cfg.metric = Metric::parse("w2");
  cfg.n_schedule = powers_of_two(5, 12);
  cfg.trials = 10;
  cfg.master_seed = 1010;
  const RateReport rep = run_rate_experiment(cfg);
  double lo = INFINITY, hi = 0.0;
  bool below = true;
  for (const auto& r : rep.rows) {
    const double n = static_cast<double>(r.n);
    const double scaled = r.mean_sq_dist * std::pow(n, 2.0 / 5.0);
    lo = std::min(lo, scaled);
    hi = std::max(hi, scaled);
    below = below && r.mean_sq_dist < fournier_w2_upper(5, n, 100.0);
  }
  return {hi / lo <= 3.0 && below, "max/min of W2^2 n^(2/5) = " + fmt(hi / lo, 4) + " (range " +
                                       fmt(lo, 4) + ".." + fmt(hi, 4) + "), below bound: " +
                                       (below ? "yes" : "no")};
}

Outcome covariance() {
  const Sampler s = Sampler::uniform_sphere(30, 0);
  const CovarianceReport rep = run_covariance_experiment(s, powers_of_two(3, 12), 50, 1.0, 1111);
  std::vector<double> res;
  double lo = INFINITY, hi = 0.0;
  for (const auto& r : rep.rows) {
    res.push_back(r.residual_over_logn);
    if (r.residual_over_logn > 0.0) {
      lo = std::min(lo, r.residual_over_logn);
      hi = std::max(hi, r.residual_over_logn);
    }
  }
  const std::size_t m = res.size();
  const bool diverging = res[m - 4] < res[m - 3] && res[m - 3] < res[m - 2] && res[m - 2] < res[m - 1];
  const bool bounded = hi > 0.0 && hi / lo <= 10.0;
  std::string seq;
  for (double r : res) seq += (seq.empty() ? "" : ", ") + fmt(r, 3);
  return {bounded && !diverging, "positive-part max/min = " + fmt(hi / lo, 4) +
                                     ", residual/ln n by n: [" + seq + "]"};
}

DiscreteMeasure decomposition_measure() {
  CounterRng rng(1212);
  Matrix p(200, 20);
  for (int i = 0; i < 200; ++i) {
    for (int j = 0; j < 20; ++j) p(i, j) = rng.normal() / (1.0 + j);
  }
  p /= p.rowwise().norm().maxCoeff();
  return DiscreteMeasure::uniform(p);
}

Outcome decomposition() {
  const DiscreteMeasure mu = decomposition_measure();
  bool ok = true;
  std::string detail;
  for (int t : {2, 3, 5}) {
    const DecompositionReport r = run_decomposition_experiment(mu, 50, 10, 1213, t);
    double min_slack = INFINITY;
    for (const auto& tr : r.per_trial) min_slack = std::min(min_slack, tr.triangle_slack);
    ok = ok && r.triangle_violations == 0 && r.head_bound_ok && r.trace_bound_ok;
    detail += "t=" + std::to_string(t) + ": min slack " + fmt(min_slack, 3) + ", S1(mu,P#mu) " +
              fmt(r.head.mean, 5) + " <= " + fmt(r.sqrt_lambda_next, 5) + ", lambda_t " +
              fmt(r.spectrum[t - 1], 4) + "; ";
  }
  return {ok, detail};
}

Outcome sinkhorn_check() {
  CounterRng rng(1313);
  double worst = 0.0;
  for (int rep = 0; rep < 50; ++rep) {
    const DiscreteMeasure a = random_measure(rng, 10, 3);
    const DiscreteMeasure b = random_measure(rng, 10, 3);
    const CostMatrix c = squared_euclidean_cost(a, b);
    const double exact = solve_exact_ot(c, a.weights(), b.weights()).objective;
    const double approx =
        sinkhorn(c, a.weights(), b.weights(), 1e-3 * c.entries.maxCoeff()).objective;
    worst = std::max(worst, std::abs(approx - exact) / exact);
  }
  return {worst <= 0.01, "max relative error = " + fmt(worst)};
}

std::string read_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

Outcome determinism() {
  ExperimentConfig cfg;
  cfg.sampler_spec = "uniform-sphere:d=6";
  cfg.metric = Metric::parse("s1");
  cfg.n_schedule = {8, 16};
  cfg.trials = 4;
  cfg.master_seed = 1414;
  cfg.srw.tol = 1e-3;
  cfg.srw.max_iters = 50;
  cfg.reference_size = 256;
  std::ostringstream a, b;
  write_rate_csv(run_rate_experiment(cfg), a);
  cfg.threads = 3;
  write_rate_csv(run_rate_experiment(cfg), b);
  bool ok = a.str() == b.str();
  std::string detail = std::string("library threads 1 vs 3: ") + (ok ? "identical" : "differ");
  if (!g_cli.empty()) {
    const std::string args = " rate --metric s1 --sampler uniform-sphere:d=6 --n-schedule 8,16 "
                             "--trials 4 --seed 1414 --reference-size 256 --max-iters 50 --out ";
    const std::string p1 = "acceptance_rate_1.csv", p2 = "acceptance_rate_2.csv";
    const int r1 = std::system((g_cli + args + p1 + " >/dev/null 2>&1").c_str());
    const int r2 = std::system((g_cli + args + p2 + " --threads 2 >/dev/null 2>&1").c_str());
    const std::string c1 = read_file(p1), c2 = read_file(p2);
    const bool same = r1 == 0 && r2 == 0 && !c1.empty() && c1 == c2;
    ok = ok && same;
    detail += std::string("; cli repeat: ") + (same ? "identical" : "differ");
    std::remove(p1.c_str());
    std::remove(p2.c_str());
  }
  return {ok, detail};
}

Outcome metric_axioms() {
  CounterRng rng(1515);
  double sym = 0.0, id = 0.0, tri = -INFINITY;
  for (int rep = 0; rep < 50; ++rep) {
    const int d = uniform_int(rng, 2, 5);
    const DiscreteMeasure a = random_measure(rng, uniform_int(rng, 2, 10), d);
    const DiscreteMeasure b = random_measure(rng, uniform_int(rng, 2, 10), d);
    const DiscreteMeasure c = random_measure(rng, uniform_int(rng, 2, 10), d);
    const double ab = s1_distance(a, b).distance;
    const double bc = s1_distance(b, c).distance;
    const double ac = s1_distance(a, c).distance;
    sym = std::max(sym, std::abs(ab - s1_distance(b, a).distance));
    id = std::max(id, s1_distance(a, a).distance);
    tri = std::max(tri, ac - ab - bc);
  }
  return {sym <= 1e-4 && id <= 1e-6 && tri <= 1e-3, "symmetry " + fmt(sym) + ", identity " +
                                                         fmt(id) + ", triangle excess " + fmt(tri)};
}

struct Criterion {
  int id;
  const char* name;
  double limit_s;
  std::function<Outcome()> run;
};

}  // namespace

int main(int argc, char** argv) {
  std::set<int> only;
  for (int i = 1; i < argc; ++i) {
    const std::string arg = argv[i];
    if (arg == "--cli" && i + 1 < argc) {
      g_cli = argv[++i];
    } else {
      only.insert(std::atoi(arg.c_str()));
    }
  }

  const std::vector<Criterion> criteria = {
      {1, "collinear equality", 10, collinear},
      {2, "sandwich inequalities", 120, sandwich},
      {3, "antipodal oracle", 1, antipodal},
      {4, "grid oracle", 30, grid_oracle},
      {5, "ambient invariance", 30, ambient},
      {6, "MAD lemma", 5, mad},
      {7, "packing feasibility", 60, packing},
      {8, "lower-bound constant", 300, lower_bound},
      {9, "upper-rate trend", 900, upper_rate},
      {10, "W2 dimension rate", 600, w2_rate},
      {11, "covariance bound", 600, covariance},
      {12, "decomposition", 300, decomposition},
      {13, "sinkhorn cross-check", 30, sinkhorn_check},
      {14, "determinism", 60, determinism},
      {15, "metric axioms", 120, metric_axioms},
  };

  int failed = 0;
  for (const auto& c : criteria) {
    if (!only.empty() && !only.count(c.id)) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const bool in_time = secs <= c.limit_s;
    const bool pass = o.pass && in_time;
    if (!pass) ++failed;
    std::printf("[%s] %2d %-22s %7.2fs (limit %gs%s) %s\n", pass ? "PASS" : "FAIL", c.id, c.name,
                secs, c.limit_s, in_time ? "" : ", exceeded", o.detail.c_str());
    std::fflush(stdout);
  }
  return failed == 0 ? 0 : 1;
}
