#include <optional>
#include <string>

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "srwrate/bounds.hpp"
#include "srwrate/errors.hpp"
#include "srwrate/harness.hpp"
#include "srwrate/io.hpp"
#include "srwrate/measures.hpp"
#include "srwrate/ot.hpp"
#include "srwrate/srw.hpp"
#include "srwrate/verify.hpp"

namespace py = pybind11;
using namespace srwrate;

namespace {

DiscreteMeasure make_measure(const Matrix& points, const std::optional<Vector>& weights) {
  if (!weights) return DiscreteMeasure::uniform(points);
  return DiscreteMeasure(points, *weights);
}

py::tuple measure_tuple(const DiscreteMeasure& m) { return py::make_tuple(m.points(), m.weights()); }

SrwOptions srw_options(double tol, int max_iters, const std::string& solver) {
  SrwOptions o;
  o.tol = tol;
  o.max_iters = max_iters;
  if (solver == "auto") {
    o.method = SrwMethod::Auto;
  } else if (solver == "frank-wolfe") {
    o.method = SrwMethod::FrankWolfe;
  } else if (solver == "interior-point") {
    o.method = SrwMethod::InteriorPoint;
  } else {
    throw InvalidArgument("unknown solver '" + solver + "'");
  }
  return o;
}

template <class T>
py::object optional_obj(const std::optional<T>& v) {
  return v ? py::cast(*v) : py::none();
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Wasserstein and subspace robust Wasserstein distances";

  // Translators run newest first, so the base class goes in first.
  auto base = py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
  py::register_exception<InvalidArgument>(m, "InvalidArgument", PyExc_ValueError);
  py::register_exception<PackingNotFound>(m, "PackingNotFound", base.ptr());
  py::register_exception<NumericalError>(m, "NumericalError", base.ptr());

  m.def("version", &version_string);

  m.def(
      "sample_empirical",
      [](const std::string& spec, std::size_t n, std::uint64_t seed) {
        return measure_tuple(sample_empirical(Sampler::parse(spec, seed), n));
      },
      py::arg("spec"), py::arg("n"), py::arg("seed") = 0);

  m.def(
      "greedy_separated_set",
      [](int dim, double epsilon, std::size_t target, std::uint64_t seed, std::size_t max_attempts) {
        return greedy_separated_set(dim, epsilon, target, seed, max_attempts).points;
      },
      py::arg("dim"), py::arg("epsilon"), py::arg("target"), py::arg("seed") = 0,
      py::arg("max_attempts") = 1'000'000);

  m.def(
      "worst_case_measure",
      [](std::size_t n, std::uint64_t seed) { return measure_tuple(worst_case_measure(n, seed)); },
      py::arg("n"), py::arg("seed") = 0);

  m.def(
      "wasserstein",
      [](const Matrix& x, const Matrix& y, int p, std::optional<Vector> a, std::optional<Vector> b) {
        py::gil_scoped_release release;
        return wasserstein(make_measure(x, a), make_measure(y, b), p);
      },
      py::arg("x"), py::arg("y"), py::arg("p") = 2, py::arg("a") = py::none(), py::arg("b") = py::none());

  m.def(
      "srw_distance",
      [](const Matrix& x, const Matrix& y, int k, std::optional<Vector> a, std::optional<Vector> b,
         double tol, int max_iters, const std::string& solver) {
        const auto mu = make_measure(x, a);
        const auto nu = make_measure(y, b);
        const SrwOptions opts = srw_options(tol, max_iters, solver);
        SrwResult r;
        {
          py::gil_scoped_release release;
          r = srw_distance(mu, nu, k, opts);
        }
        py::dict out;
        out["distance"] = r.distance;
        out["k"] = r.k;
        out["fw_gap"] = r.fw_gap;
        out["lower_bound"] = r.lower_bound;
        out["iterations"] = r.iterations;
        out["converged"] = r.converged;
        out["coupling"] = r.coupling.dense();
        out["witness_basis"] = r.witness_basis;
        return out;
      },
      py::arg("x"), py::arg("y"), py::arg("k") = 1, py::arg("a") = py::none(), py::arg("b") = py::none(),
      py::arg("tol") = 1e-6, py::arg("max_iters") = 5000, py::arg("solver") = "auto");

  m.def(
      "projection_residual_bound",
      [](const Matrix& x, const Matrix& basis, std::optional<Vector> a) {
        return projection_residual_bound(make_measure(x, a), basis);
      },
      py::arg("x"), py::arg("basis"), py::arg("a") = py::none());

  m.def(
      "bounds",
      [](int d, double n, double q) {
        const BoundSet b = compute_bounds(d, n, q);
        py::dict out;
        out["d"] = b.d;
        out["n"] = b.n;
        out["q"] = b.q;
        out["H_value"] = optional_obj(b.H_value);
        out["kappa_dr"] = optional_obj(b.kappa_dr);
        out["kappa_d"] = optional_obj(b.kappa_d);
        out["kappa_chain"] = optional_obj(b.kappa_chain);
        out["fournier_w2_sq_bound"] = optional_obj(b.fournier_w2_sq_bound);
        out["t_star"] = optional_obj(b.t_star);
        out["t_star_main_branch"] = optional_obj(b.t_star_main_branch);
        out["upper_curve"] = optional_obj(b.upper_curve);
        out["lower_curve"] = optional_obj(b.lower_curve);
        return out;
      },
      py::arg("d"), py::arg("n"), py::arg("q"));

  m.def(
      "mad_binomial",
      [](long n, double p) {
        const auto r = mad_binomial(n, p);
        return py::make_tuple(r.mad, r.std);
      },
      py::arg("n"), py::arg("p"));

  m.def(
      "t_star",
      [](double n) {
        const auto t = t_star(n);
        return py::make_tuple(t.t, t.main_branch);
      },
      py::arg("n"));

  m.def(
      "rate_curves",
      [](double n) {
        const auto c = rate_curves(n);
        return py::make_tuple(c.upper, c.lower);
      },
      py::arg("n"));

  // Returns the JSON report text; the Python wrapper decodes it.
  m.def(
      "_rate_json",
      [](const std::string& sampler, const std::string& metric, int k, std::vector<std::size_t> schedule,
         int trials, std::uint64_t seed, double tol, int max_iters, const std::string& solver, int threads,
         std::size_t reference_size) {
        ExperimentConfig cfg;
        cfg.sampler_spec = sampler;
        cfg.metric = Metric::parse(metric, k);
        cfg.n_schedule = std::move(schedule);
        cfg.trials = trials;
        cfg.master_seed = seed;
        cfg.srw = srw_options(tol, max_iters, solver);
        cfg.threads = threads;
        cfg.reference_size = reference_size;
        cfg.validate();
        py::gil_scoped_release release;
        return dump_json(rate_report_to_json(run_rate_experiment(cfg)));
      },
      py::arg("sampler"), py::arg("metric"), py::arg("k"), py::arg("n_schedule"), py::arg("trials"),
      py::arg("seed"), py::arg("tol"), py::arg("max_iters"), py::arg("solver"), py::arg("threads"),
      py::arg("reference_size"));

  m.def(
      "verify",
      [](const std::string& suite, std::uint64_t seed) {
        py::list out;
        for (const auto& r : run_verify(parse_suite(suite), seed)) {
          py::dict d;
          d["suite"] = r.suite;
          d["name"] = r.name;
          d["passed"] = r.passed;
          d["detail"] = r.detail;
          out.append(d);
        }
        return out;
      },
      py::arg("suite") = "all", py::arg("seed") = 1);
}
