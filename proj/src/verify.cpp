#include "srwrate/verify.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>

#include "srwrate/bounds.hpp"
#include "srwrate/errors.hpp"
#include "srwrate/io.hpp"
#include "srwrate/measures.hpp"
#include "srwrate/ot.hpp"
#include "srwrate/srw.hpp"

namespace srwrate {

namespace {

Vector random_ball_point(CounterRng& rng, int d) {
  Vector v(d);
  for (int i = 0; i < d; ++i) v[i] = rng.normal();
  const double norm = v.norm();
  const double radius = std::pow(rng.uniform(), 1.0 / d);
  return norm > 0.0 ? Vector(v * (radius / norm)) : Vector::Zero(d);
}

DiscreteMeasure random_measure(CounterRng& rng, int n, int d) {
  Matrix pts(n, d);
  Vector w(n);
  for (int i = 0; i < n; ++i) {
    pts.row(i) = random_ball_point(rng, d).transpose();
    w[i] = 0.2 + rng.uniform();
  }
  return DiscreteMeasure(pts, w / w.sum());
}

// Accumulates the worst value of a quantity that must stay <= 0.
struct Worst {
  double value = -INFINITY;
  void add(double v) { value = std::max(value, v); }
  bool ok() const { return value <= 0.0; }
  std::string str() const { return "worst excess " + format_double(value); }
};

class Runner {
 public:
  Runner(std::string suite, std::vector<CheckResult>& out) : suite_(std::move(suite)), out_(out) {}

  // fn returns the detail string and sets `passed`.
  void check(const std::string& name, const std::function<bool(std::string&)>& fn) {
    CheckResult r;
    r.suite = suite_;
    r.name = name;
    try {
      r.passed = fn(r.detail);
    } catch (const std::exception& e) {
      r.passed = false;
      r.detail = std::string("exception: ") + e.what();
    }
    out_.push_back(std::move(r));
  }

 private:
  std::string suite_;
  std::vector<CheckResult>& out_;
};

void lemma_suite(std::vector<CheckResult>& out, std::uint64_t seed) {
  Runner run("lemmas", out);

  run.check("mad_binomial >= std/sqrt(2), n in [2,100]", [](std::string& detail) {
    Worst w;
    for (long n = 2; n <= 100; ++n) {
      for (long j = 1; j < n; ++j) {
        const MadResult m = mad_binomial(n, static_cast<double>(j) / n);
        w.add(m.std / std::sqrt(2.0) - m.mad - 1e-15);
      }
    }
    detail = w.str();
    return w.ok();
  });

  run.check("mad_binomial equality at (2, 1/2)", [](std::string& detail) {
    const MadResult m = mad_binomial(2, 0.5);
    const double diff = std::abs(m.mad - m.std / std::sqrt(2.0));
    detail = "|mad - std/sqrt2| = " + format_double(diff);
    return diff <= 1e-15;
  });

  run.check("covering_packing_bounds(1, 1/3) = (3, 9)", [](std::string& detail) {
    const CoveringBounds b = covering_packing_bounds(1, 1.0 / 3.0);
    detail = format_double(b.lower) + ", " + format_double(b.upper);
    return std::abs(b.lower - 3.0) < 1e-12 && std::abs(b.upper - 9.0) < 1e-12;
  });

  run.check("worst_case_measure separation certificate", [seed](std::string& detail) {
    for (std::size_t n : {2u, 10u, 100u}) {
      const SeparatedSet s = worst_case_support(n, derive_seed(seed, {n}));
      s.certify();
      if (s.points.rows() != static_cast<Eigen::Index>(n) || s.dim != worst_case_dimension(n)) {
        detail = "wrong size or dimension at n=" + std::to_string(n);
        return false;
      }
    }
    detail = "n in {2, 10, 100}";
    return true;
  });

  run.check("isometric_embed preserves distances", [seed](std::string& detail) {
    CounterRng rng(derive_seed(seed, {11}));
    Worst w;
    for (int rep = 0; rep < 5; ++rep) {
      const DiscreteMeasure mu = random_measure(rng, 6, 3);
      const DiscreteMeasure e = isometric_embed(mu, 9, derive_seed(seed, {12, static_cast<std::uint64_t>(rep)}));
      for (int i = 0; i < 6; ++i) {
        w.add(std::abs(e.points().row(i).norm() - mu.points().row(i).norm()) - 1e-12);
        for (int j = 0; j < i; ++j) {
          w.add(std::abs((e.points().row(i) - e.points().row(j)).norm() -
                         (mu.points().row(i) - mu.points().row(j)).norm()) - 1e-12);
        }
      }
    }
    detail = w.str();
    return w.ok();
  });

  run.check("project_measure is idempotent", [seed](std::string& detail) {
    CounterRng rng(derive_seed(seed, {13}));
    const DiscreteMeasure mu = random_measure(rng, 8, 5);
    const Matrix basis = random_orthogonal(5, derive_seed(seed, {14})).leftCols(2);
    const DiscreteMeasure once = project_measure(mu, basis);
    const DiscreteMeasure twice = project_measure(once, basis);
    const double diff = (once.points() - twice.points()).cwiseAbs().maxCoeff();
    detail = "max coordinate change " + format_double(diff);
    return diff <= 1e-12;
  });

  run.check("projection residual bound >= S1(mu, P#mu)", [seed](std::string& detail) {
    CounterRng rng(derive_seed(seed, {15}));
    Worst w;
    for (int rep = 0; rep < 4; ++rep) {
      const DiscreteMeasure mu = random_measure(rng, 8, 4);
      const Matrix basis =
          random_orthogonal(4, derive_seed(seed, {16, static_cast<std::uint64_t>(rep)})).leftCols(2);
      const double s = s1_distance(mu, project_measure(mu, basis)).distance;
      w.add(s - projection_residual_bound(mu, basis) - 1e-4);
    }
    detail = w.str();
    return w.ok();
  });

  run.check("fournier_H -> 1 as q grows", [](std::string& detail) {
    double prev = INFINITY;
    for (int j = 2; j <= 6; ++j) {
      const double gap = std::abs(fournier_H(1.0, 10.0 / 3.0, std::pow(10.0, j)) - 1.0);
      if (!(gap < prev)) {
        detail = "not decreasing at q=1e" + std::to_string(j);
        return false;
      }
      prev = gap;
    }
    detail = "|H - 1| at q=1e6: " + format_double(prev);
    return prev < 0.01;
  });

  run.check("fournier_w2_upper decreasing in n", [](std::string& detail) {
    double prev = INFINITY;
    for (double n = 2.0; n <= 1e6; n *= 2.0) {
      const double v = fournier_w2_upper(5, n, 100.0);
      if (!(v < prev)) {
        detail = "not decreasing at n=" + format_double(n);
        return false;
      }
      prev = v;
    }
    detail = "d=5, q=100";
    return true;
  });

  run.check("compute_bounds matches t_star and rate_curves", [](std::string& detail) {
    for (double n : {3.0, 100.0, 1e5, 1e9}) {
      const BoundSet b = compute_bounds(5, n, 100.0);
      const RateCurves c = rate_curves(n);
      const long t = static_cast<long>(std::floor(std::log(n) / std::log(std::log(n))));
      if (!b.t_star || *b.t_star != t || *b.upper_curve != c.upper || *b.lower_curve != c.lower) {
        detail = "mismatch at n=" + format_double(n);
        return false;
      }
    }
    detail = "n in {3, 1e2, 1e5, 1e9}";
    return true;
  });
}

void metric_suite(std::vector<CheckResult>& out, std::uint64_t seed) {
  Runner run("metric", out);

  run.check("S1 symmetry, identity, triangle", [seed](std::string& detail) {
    CounterRng rng(derive_seed(seed, {21}));
    double sym = 0.0, id = 0.0, tri = -INFINITY;
    for (int rep = 0; rep < 6; ++rep) {
      const DiscreteMeasure a = random_measure(rng, 5, 3);
      const DiscreteMeasure b = random_measure(rng, 6, 3);
      const DiscreteMeasure c = random_measure(rng, 4, 3);
      const double ab = s1_distance(a, b).distance;
      const double ba = s1_distance(b, a).distance;
      const double bc = s1_distance(b, c).distance;
      const double ac = s1_distance(a, c).distance;
      sym = std::max(sym, std::abs(ab - ba));
      id = std::max(id, s1_distance(a, a).distance);
      tri = std::max(tri, ac - ab - bc);
    }
    detail = "symmetry " + format_double(sym) + ", identity " + format_double(id) +
             ", triangle excess " + format_double(tri);
    return sym <= 1e-4 && id <= 1e-6 && tri <= 1e-3;
  });

  run.check("W2/sqrt(d) <= S1 <= Sk <= sqrt(k) S1, S1 <= W2", [seed](std::string& detail) {
    CounterRng rng(derive_seed(seed, {22}));
    Worst w;
    for (int rep = 0; rep < 6; ++rep) {
      const int d = 2 + rep % 4;
      const DiscreteMeasure a = random_measure(rng, 6, d);
      const DiscreteMeasure b = random_measure(rng, 5, d);
      const double w2 = wasserstein(a, b, 2);
      const double s1 = s1_distance(a, b).distance;
      w.add(w2 / std::sqrt(d) - s1 - 1e-3);
      w.add(s1 - w2 - 1e-3);
      for (int k = 2; k <= d; ++k) {
        const double sk = srw_distance(a, b, k).distance;
        w.add(s1 - sk - 1e-3);
        w.add(sk - std::sqrt(k) * s1 - 2e-3);
      }
    }
    detail = w.str();
    return w.ok();
  });

  run.check("S_dim equals W2", [seed](std::string& detail) {
    CounterRng rng(derive_seed(seed, {23}));
    double worst = 0.0;
    for (int rep = 0; rep < 4; ++rep) {
      const DiscreteMeasure a = random_measure(rng, 5, 3);
      const DiscreteMeasure b = random_measure(rng, 5, 3);
      worst = std::max(worst, std::abs(srw_distance(a, b, 3).distance - wasserstein(a, b, 2)));
    }
    detail = "max |S_3 - W2| " + format_double(worst);
    return worst <= 1e-4;
  });

  run.check("S1 ambient invariance R^3 -> R^9", [seed](std::string& detail) {
    CounterRng rng(derive_seed(seed, {24}));
    double worst = 0.0;
    for (int rep = 0; rep < 4; ++rep) {
      const DiscreteMeasure a = random_measure(rng, 5, 3);
      const DiscreteMeasure b = random_measure(rng, 5, 3);
      const auto rot = derive_seed(seed, {25, static_cast<std::uint64_t>(rep)});
      const double s = s1_distance(a, b).distance;
      const double t = s1_distance(isometric_embed(a, 9, rot), isometric_embed(b, 9, rot)).distance;
      worst = std::max(worst, std::abs(s - t));
    }
    detail = "max |delta S1| " + format_double(worst);
    return worst <= 1e-4;
  });

  run.check("W2 metric, W1 <= W2", [seed](std::string& detail) {
    CounterRng rng(derive_seed(seed, {26}));
    double sym = 0.0, tri = -INFINITY, jensen = -INFINITY;
    for (int rep = 0; rep < 10; ++rep) {
      const DiscreteMeasure a = random_measure(rng, 7, 4);
      const DiscreteMeasure b = random_measure(rng, 6, 4);
      const DiscreteMeasure c = random_measure(rng, 8, 4);
      const double ab = wasserstein(a, b, 2);
      sym = std::max(sym, std::abs(ab - wasserstein(b, a, 2)));
      tri = std::max(tri, wasserstein(a, c, 2) - ab - wasserstein(b, c, 2));
      jensen = std::max(jensen, wasserstein(a, b, 1) - ab);
    }
    detail = "symmetry " + format_double(sym) + ", triangle excess " + format_double(tri) +
             ", W1 - W2 " + format_double(jensen);
    return sym <= 1e-10 && tri <= 1e-8 && jensen <= 1e-12;
  });

  run.check("exact OT invariant under atom permutation", [seed](std::string& detail) {
    CounterRng rng(derive_seed(seed, {27}));
    const DiscreteMeasure a = random_measure(rng, 9, 3);
    const DiscreteMeasure b = random_measure(rng, 7, 3);
    std::vector<Eigen::Index> perm(9);
    std::iota(perm.begin(), perm.end(), 0);
    std::reverse(perm.begin(), perm.end());
    std::swap(perm[0], perm[4]);
    Matrix p(9, 3);
    Vector w(9);
    for (Eigen::Index i = 0; i < 9; ++i) {
      p.row(i) = a.points().row(perm[i]);
      w[i] = a.weights()[perm[i]];
    }
    const DiscreteMeasure ap(p, w);
    const double x = solve_exact_ot(squared_euclidean_cost(a, b), a.weights(), b.weights()).objective;
    const double y = solve_exact_ot(squared_euclidean_cost(ap, b), ap.weights(), b.weights()).objective;
    detail = "difference " + format_double(x - y);
    return std::abs(x - y) <= 1e-14;
  });
}

void oracle_suite(std::vector<CheckResult>& out, std::uint64_t seed) {
  Runner run("oracle", out);

  run.check("antipodal instance: S1 = 1, W2 = sqrt 2", [](std::string& detail) {
    Matrix a(2, 2), b(2, 2);
    a << 1, 0, -1, 0;
    b << 0, 1, 0, -1;
    const DiscreteMeasure mu = DiscreteMeasure::uniform(a), nu = DiscreteMeasure::uniform(b);
    const double s = s1_distance(mu, nu).distance;
    const double w = wasserstein(mu, nu, 2);
    detail = "S1 " + format_double(s) + ", W2 " + format_double(w);
    return std::abs(s - 1.0) <= 1e-3 && std::abs(w - std::sqrt(2.0)) <= 1e-9;
  });

  run.check("collinear S1 equals quantile W2", [seed](std::string& detail) {
    CounterRng rng(derive_seed(seed, {31}));
    double worst = 0.0;
    for (int rep = 0; rep < 8; ++rep) {
      const Vector dir = random_ball_point(rng, 3).normalized();
      auto line = [&](int n) {
        Matrix p(n, 3);
        Vector w(n);
        for (int i = 0; i < n; ++i) {
          p.row(i) = (2.0 * rng.uniform() - 1.0) * dir.transpose();
          w[i] = 0.2 + rng.uniform();
        }
        return DiscreteMeasure(p, w / w.sum());
      };
      const DiscreteMeasure a = line(6), b = line(5);
      worst = std::max(worst, std::abs(s1_distance(a, b).distance - quantile_w2_1d(a, b)));
    }
    detail = "max difference " + format_double(worst);
    return worst <= 1e-5;
  });

  run.check("2x2 grid oracle and gap certificate", [seed](std::string& detail) {
    CounterRng rng(derive_seed(seed, {32}));
    double worst = 0.0, cert = -INFINITY;
    for (int rep = 0; rep < 5; ++rep) {
      Matrix a(2, 2), b(2, 2);
      for (int i = 0; i < 2; ++i) {
        a.row(i) = random_ball_point(rng, 2).transpose();
        b.row(i) = random_ball_point(rng, 2).transpose();
      }
      const DiscreteMeasure mu = DiscreteMeasure::uniform(a), nu = DiscreteMeasure::uniform(b);
      const GridResult g = brute_coupling_grid(
          mu, nu,
          [&](const Matrix& plan) {
            Matrix v = Matrix::Zero(2, 2);
            for (int i = 0; i < 2; ++i) {
              for (int j = 0; j < 2; ++j) {
                const Vector dlt = a.row(i) - b.row(j);
                v += plan(i, j) * dlt * dlt.transpose();
              }
            }
            return Eigen::SelfAdjointEigenSolver<Matrix>(v).eigenvalues().maxCoeff();
          },
          10000);
      const SrwResult r = s1_distance(mu, nu);
      worst = std::max(worst, std::abs(r.objective() - g.best_value));
      cert = std::max(cert, r.objective() - r.fw_gap - g.best_value - 1e-8);
    }
    detail = "max |S1^2 - grid| " + format_double(worst) + ", certificate excess " + format_double(cert);
    return worst <= 1e-4 && cert <= 0.0;
  });

  run.check("uniform OT equals best assignment", [seed](std::string& detail) {
    CounterRng rng(derive_seed(seed, {33}));
    double worst = 0.0;
    for (int rep = 0; rep < 4; ++rep) {
      const int n = 5;
      Matrix a(n, 3), b(n, 3);
      for (int i = 0; i < n; ++i) {
        a.row(i) = random_ball_point(rng, 3).transpose();
        b.row(i) = random_ball_point(rng, 3).transpose();
      }
      const DiscreteMeasure mu = DiscreteMeasure::uniform(a), nu = DiscreteMeasure::uniform(b);
      const CostMatrix c = squared_euclidean_cost(mu, nu);
      std::vector<int> perm(n);
      std::iota(perm.begin(), perm.end(), 0);
      double best = INFINITY;
      do {
        double s = 0.0;
        for (int i = 0; i < n; ++i) s += c(i, perm[i]) / n;
        best = std::min(best, s);
      } while (std::next_permutation(perm.begin(), perm.end()));
      worst = std::max(worst, std::abs(solve_exact_ot(c, mu.weights(), nu.weights()).objective - best));
    }
    detail = "max difference " + format_double(worst);
    return worst <= 1e-12;
  });

  run.check("sinkhorn within 1% of exact", [seed](std::string& detail) {
    CounterRng rng(derive_seed(seed, {34}));
    double worst = 0.0;
    for (int rep = 0; rep < 5; ++rep) {
      const DiscreteMeasure a = random_measure(rng, 10, 3);
      const DiscreteMeasure b = random_measure(rng, 10, 3);
      const CostMatrix c = squared_euclidean_cost(a, b);
      const double exact = solve_exact_ot(c, a.weights(), b.weights()).objective;
      const double approx = sinkhorn(c, a.weights(), b.weights(), 1e-3 * c.entries.maxCoeff()).objective;
      worst = std::max(worst, std::abs(approx - exact) / exact);
    }
    detail = "max relative error " + format_double(worst);
    return worst <= 0.01;
  });

  run.check("separated bound <= W1", [seed](std::string& detail) {
    Worst w;
    const SeparatedSet s = worst_case_support(20, derive_seed(seed, {35}));
    const DiscreteMeasure mu = DiscreteMeasure::uniform(s.points);
    CounterRng rng(derive_seed(seed, {36}));
    for (int rep = 0; rep < 5; ++rep) {
      Vector counts = Vector::Zero(20);
      for (int i = 0; i < 20; ++i) counts[static_cast<Eigen::Index>(rng.below(20))] += 1.0;
      const DiscreteMeasure nu(s.points, counts / 20.0);
      w.add(separated_w1_lower_bound(s, mu.weights(), nu.weights()) - wasserstein(mu, nu, 1) - 1e-12);
    }
    detail = w.str();
    return w.ok();
  });
}

}  // namespace

VerifySuite parse_suite(const std::string& name) {
  if (name == "lemmas") return VerifySuite::Lemmas;
  if (name == "metric") return VerifySuite::Metric;
  if (name == "oracle") return VerifySuite::Oracle;
  if (name == "all") return VerifySuite::All;
  throw InvalidArgument("unknown suite '" + name + "' (expected lemmas, metric, oracle, all)");
}

std::vector<CheckResult> run_verify(VerifySuite suite, std::uint64_t seed) {
  std::vector<CheckResult> out;
  if (suite == VerifySuite::Lemmas || suite == VerifySuite::All) lemma_suite(out, seed);
  if (suite == VerifySuite::Metric || suite == VerifySuite::All) metric_suite(out, seed);
  if (suite == VerifySuite::Oracle || suite == VerifySuite::All) oracle_suite(out, seed);
  return out;
}

}  // namespace srwrate
