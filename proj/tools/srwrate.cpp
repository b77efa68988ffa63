#include <cstdint>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "srwrate/bounds.hpp"
#include "srwrate/errors.hpp"
#include "srwrate/harness.hpp"
#include "srwrate/io.hpp"
#include "srwrate/measures.hpp"
#include "srwrate/ot.hpp"
#include "srwrate/srw.hpp"
#include "srwrate/verify.hpp"

using namespace srwrate;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitNumerical = 1;
constexpr int kExitUsage = 2;

struct SolverFlags {
  double tol = SrwOptions{}.tol;
  int max_iters = SrwOptions{}.max_iters;
  SrwMethod method = SrwMethod::Auto;
  SrwLinearization linearization = SrwLinearization::Smoothed;
  SrwStep step = SrwStep::LineSearch;

  void add_to(CLI::App* app) {
    app->add_option("--tol", tol, "SRW stopping tolerance on the gap, relative to max(1, S^2)")
        ->capture_default_str()
        ->check(CLI::PositiveNumber);
    app->add_option("--max-iters", max_iters, "SRW iteration cap")
        ->capture_default_str()
        ->check(CLI::PositiveNumber);
    app->add_option("--solver", method, "SRW solver")
        ->transform(CLI::CheckedTransformer(
            std::map<std::string, SrwMethod>{{"auto", SrwMethod::Auto},
                                             {"frank-wolfe", SrwMethod::FrankWolfe},
                                             {"interior-point", SrwMethod::InteriorPoint}}));
    app->add_option("--linearization", linearization, "Frank-Wolfe linearization")
        ->transform(CLI::CheckedTransformer(std::map<std::string, SrwLinearization>{
            {"smoothed", SrwLinearization::Smoothed}, {"projector", SrwLinearization::Projector}}));
    app->add_option("--step", step, "Frank-Wolfe step rule")
        ->transform(CLI::CheckedTransformer(std::map<std::string, SrwStep>{
            {"line-search", SrwStep::LineSearch}, {"standard", SrwStep::Standard}}));
  }

  SrwOptions options() const {
    SrwOptions o;
    o.tol = tol;
    o.max_iters = max_iters;
    o.method = method;
    o.linearization = linearization;
    o.step = step;
    return o;
  }
};

Json srw_json(const SrwOptions& o) {
  ExperimentConfig c;
  c.srw = o;
  return config_to_json(c)["srw"];
}

void echo(const std::string& sub, const Json& config) {
  std::cerr << "srwrate " << sub << " config: " << dump_json(config) << '\n';
}

template <class T>
Json optional_json(const std::optional<T>& v) {
  return v ? Json(*v) : Json(nullptr);
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw InvalidArgument("cannot open '" + path + "' for writing");
  f << text;
  if (!f) throw Error("write to '" + path + "' failed");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Wasserstein and subspace robust Wasserstein distances and rate experiments"};
  app.set_version_flag("--version", version_string());
  app.require_subcommand(1);

  // dist
  auto* dist = app.add_subcommand("dist", "distance between two measure files");
  std::string metric_name;
  int k = 1;
  std::string mu_path, nu_path;
  SolverFlags dist_solver;
  dist->add_option("--metric", metric_name, "w1, w2, s1 or sk")
      ->required()
      ->check(CLI::IsMember({"w1", "w2", "s1", "sk"}));
  dist->add_option("--k", k, "subspace dimension for sk")->check(CLI::PositiveNumber);
  dist->add_option("--mu", mu_path, "first measure (JSON)")->required();
  dist->add_option("--nu", nu_path, "second measure (JSON)")->required();
  dist_solver.add_to(dist);

  // construct
  auto* construct = app.add_subcommand("construct", "worst-case separated measure");
  std::size_t construct_n = 0;
  std::uint64_t construct_seed = 0;
  std::string construct_out;
  construct->add_option("--n", construct_n, "number of atoms")->required()->check(CLI::PositiveNumber);
  construct->add_option("--out", construct_out, "output measure file")->required();
  construct->add_option("--seed", construct_seed, "construction seed");

  // rate
  auto* rate = app.add_subcommand("rate", "empirical convergence-rate experiment");
  std::string rate_metric = "s1";
  int rate_k = 1;
  std::string sampler_spec;
  std::vector<std::size_t> schedule;
  int trials = 1;
  std::uint64_t rate_seed = 0;
  std::string csv_path, json_path;
  int threads = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  std::size_t reference_size = kReferenceSize;
  bool timing = false;
  SolverFlags rate_solver;
  rate_solver.tol = 1e-3;
  rate_solver.max_iters = 200;
  rate->add_option("--metric", rate_metric, "w1, w2, s1 or sk")
      ->check(CLI::IsMember({"w1", "w2", "s1", "sk"}));
  rate->add_option("--k", rate_k, "subspace dimension for sk")->check(CLI::PositiveNumber);
  rate->add_option("--sampler", sampler_spec, "uniform-sphere:d=D, uniform-ball:d=D, packing:n=N, file:PATH")
      ->required();
  rate->add_option("--n-schedule", schedule, "comma-separated sample sizes")
      ->required()
      ->delimiter(',');
  rate->add_option("--trials", trials, "trials per sample size")->check(CLI::PositiveNumber);
  rate->add_option("--seed", rate_seed, "master seed");
  rate->add_option("--out", csv_path, "CSV report")->required();
  rate->add_option("--json", json_path, "JSON report");
  rate->add_option("--threads", threads, "worker threads")->check(CLI::PositiveNumber);
  rate->add_option("--reference-size", reference_size, "proxy size for continuous samplers")
      ->check(CLI::PositiveNumber);
  rate->add_flag("--timing", timing, "record wall-clock times (reports are then not byte-stable)");
  rate_solver.add_to(rate);

  // bounds
  auto* bounds = app.add_subcommand("bounds", "evaluate the explicit constants and rate curves");
  int bd = 0;
  double bn = 0.0, bq = 0.0;
  bounds->add_option("--d", bd, "dimension")->required()->check(CLI::PositiveNumber);
  bounds->add_option("--n", bn, "sample size")->required();
  bounds->add_option("--q", bq, "moment order")->required();

  // verify
  auto* verify = app.add_subcommand("verify", "run invariant suites");
  std::string suite_name = "all";
  std::uint64_t verify_seed = 1;
  verify->add_option("--suite", suite_name, "lemmas, metric, oracle or all")
      ->check(CLI::IsMember({"lemmas", "metric", "oracle", "all"}));
  verify->add_option("--seed", verify_seed, "instance seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*dist) {
      const SrwOptions opts = dist_solver.options();
      Json cfg = {{"metric", metric_name}, {"k", k}, {"mu", mu_path}, {"nu", nu_path}};
      cfg["srw"] = srw_json(opts);
      echo("dist", cfg);
      const DiscreteMeasure mu = load_measure(mu_path);
      const DiscreteMeasure nu = load_measure(nu_path);
      if (mu.dim() != nu.dim()) throw InvalidArgument("measures live in different dimensions");
      const Metric metric = Metric::parse(metric_name, k);
      Json out;
      if (metric.kind == MetricKind::S1 || metric.kind == MetricKind::Sk) {
        if (metric.kind == MetricKind::Sk && metric.k > mu.dim()) {
          throw InvalidArgument("k exceeds the dimension");
        }
        SrwOptions o = opts;
        o.keep_coupling = false;
        SrwResult r;
        out["distance"] = evaluate_metric(metric, mu, nu, o, &r);
        out["fw_gap"] = r.fw_gap;
        out["iterations"] = r.iterations;
      } else {
        out["distance"] = evaluate_metric(metric, mu, nu, opts);
      }
      std::cout << dump_json(out) << '\n';
    } else if (*construct) {
      echo("construct", {{"n", construct_n}, {"seed", construct_seed}, {"out", construct_out}});
      const SeparatedSet set = worst_case_support(construct_n, construct_seed);
      set.certify();
      save_measure(DiscreteMeasure::uniform(set.points), construct_out);
      Json out = {{"n", construct_n}, {"dim", set.dim}, {"out", construct_out}};
      out["min_pairwise_distance"] = set.min_pairwise_distance();
      std::cout << dump_json(out) << '\n';
    } else if (*rate) {
      ExperimentConfig cfg;
      cfg.sampler_spec = sampler_spec;
      cfg.metric = Metric::parse(rate_metric, rate_k);
      cfg.n_schedule = schedule;
      cfg.trials = trials;
      cfg.master_seed = rate_seed;
      cfg.srw = rate_solver.options();
      cfg.threads = threads;
      cfg.reference_size = reference_size;
      cfg.record_time = timing;
      Json echoed = config_to_json(cfg);
      echoed["out"] = csv_path;
      echoed["json"] = json_path;
      echo("rate", echoed);
      cfg.validate();
      const RateReport report = run_rate_experiment(cfg);
      std::ostringstream csv;
      write_rate_csv(report, csv);
      write_text(csv_path, csv.str());
      if (!json_path.empty()) write_text(json_path, dump_json(rate_report_to_json(report), 2) + "\n");
      Json out = {{"rows", report.rows.size()}, {"out", csv_path}};
      out["fitted_C_upper"] = report.rows.front().fitted_C_upper;
      out["fitted_c_lower"] = report.rows.front().fitted_c_lower;
      std::cout << dump_json(out) << '\n';
    } else if (*bounds) {
      echo("bounds", {{"d", bd}, {"n", bn}, {"q", bq}});
      const BoundSet b = compute_bounds(bd, bn, bq);
      Json out;
      out["d"] = b.d;
      out["n"] = b.n;
      out["q"] = b.q;
      out["H_value"] = optional_json(b.H_value);
      out["kappa_dr"] = optional_json(b.kappa_dr);
      out["kappa_d"] = optional_json(b.kappa_d);
      out["kappa_chain"] = optional_json(b.kappa_chain);
      out["fournier_w2_sq_bound"] = optional_json(b.fournier_w2_sq_bound);
      out["t_star"] = optional_json(b.t_star);
      out["t_star_main_branch"] = optional_json(b.t_star_main_branch);
      out["upper_curve"] = optional_json(b.upper_curve);
      out["lower_curve"] = optional_json(b.lower_curve);
      std::cout << dump_json(out, 2) << '\n';
    } else if (*verify) {
      echo("verify", {{"suite", suite_name}, {"seed", verify_seed}});
      const auto results = run_verify(parse_suite(suite_name), verify_seed);
      int failed = 0;
      for (const auto& r : results) {
        std::cout << (r.passed ? "PASS " : "FAIL ") << r.suite << ": " << r.name << " (" << r.detail
                  << ")\n";
        if (!r.passed) {
          ++failed;
          std::cerr << "failed: " << r.suite << ": " << r.name << ": " << r.detail << '\n';
        }
      }
      std::cout << results.size() - failed << "/" << results.size() << " checks passed\n";
      return failed == 0 ? kExitOk : kExitNumerical;
    }
  } catch (const InvalidArgument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitNumerical;
  }
  return kExitOk;
}
