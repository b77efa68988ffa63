#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include <doctest.h>

#include "srwrate/errors.hpp"
#include "srwrate/ot.hpp"

using namespace srwrate;

namespace {

Matrix random_cloud(int n, int d, std::uint64_t seed) {
  CounterRng rng(seed);
  Matrix p(n, d);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < d; ++j) p(i, j) = rng.uniform() - 0.5;
    p.row(i) /= std::max(1.0, p.row(i).norm());
  }
  return p;
}

Vector random_weights(int n, std::uint64_t seed) {
  CounterRng rng(seed);
  Vector w(n);
  for (int i = 0; i < n; ++i) w(i) = 0.1 + rng.uniform();
  return w / w.sum();
}

// For uniform measures of equal size the optimum sits on a permutation
// (Birkhoff), so enumeration is exact.
double brute_assignment(const Matrix& c) {
  std::vector<int> perm(c.rows());
  std::iota(perm.begin(), perm.end(), 0);
  double best = INFINITY;
  do {
    double s = 0.0;
    for (std::size_t i = 0; i < perm.size(); ++i) s += c(i, perm[i]);
    best = std::min(best, s);
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best / c.rows();
}

}  // namespace

TEST_CASE("exact OT small cases") {
  SUBCASE("Dirac to Dirac") {
    Matrix a(1, 2), b(1, 2);
    a << 0.1, 0.2;
    b << -0.3, 0.5;
    const auto mu = DiscreteMeasure::uniform(a), nu = DiscreteMeasure::uniform(b);
    const auto sol = solve_exact_ot(squared_euclidean_cost(mu, nu), mu.weights(), nu.weights());
    CHECK(sol.plan.dense()(0, 0) == doctest::Approx(1.0));
    CHECK(sol.objective == doctest::Approx(0.25));
  }
  SUBCASE("identical supports cost nothing") {
    const auto mu = DiscreteMeasure(random_cloud(6, 3, 1), random_weights(6, 2));
    const auto sol = solve_exact_ot(squared_euclidean_cost(mu, mu), mu.weights(), mu.weights());
    CHECK(sol.objective == doctest::Approx(0.0));
    const Matrix plan = sol.plan.dense();
    CHECK((plan - Matrix(mu.weights().asDiagonal())).cwiseAbs().maxCoeff() < 1e-12);
  }
  SUBCASE("uniform{0,1} to uniform{0.5,1.5} on the line") {
    Matrix a(2, 1), b(2, 1);
    a << 0.0, 1.0;
    b << 0.5, 1.5;
    // scale into the unit ball and undo afterwards: cost scales by s^2
    const double s = 1.0 / 1.5;
    const auto mu = DiscreteMeasure::uniform(a * s), nu = DiscreteMeasure::uniform(b * s);
    const auto sol = solve_exact_ot(squared_euclidean_cost(mu, nu), mu.weights(), nu.weights());
    CHECK(sol.objective / (s * s) == doctest::Approx(0.25).epsilon(1e-12));
    // one-parameter family [[t, 1/2 - t], [1/2 - t, t]]
    double best = INFINITY;
    for (int i = 0; i <= 1000; ++i) {
      const double t = 0.5 * i / 1000;
      best = std::min(best, t * 0.25 + (0.5 - t) * 2.25 + (0.5 - t) * 0.25 + t * 0.25);
    }
    CHECK(best == doctest::Approx(0.25));
  }
}

TEST_CASE("exact OT matches permutation enumeration") {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const auto mu = DiscreteMeasure::uniform(random_cloud(6, 3, seed));
    const auto nu = DiscreteMeasure::uniform(random_cloud(6, 3, seed + 100));
    for (auto cost : {squared_euclidean_cost(mu, nu), euclidean_cost(mu, nu)}) {
      const auto sol = solve_exact_ot(cost, mu.weights(), nu.weights());
      CHECK(sol.objective == doctest::Approx(brute_assignment(cost.entries)).epsilon(1e-10));
      CHECK(sol.plan.marginal_violation() < 1e-12);
      const auto bland = solve_exact_ot(cost, mu.weights(), nu.weights(), {PivotRule::Bland, 0});
      CHECK(bland.objective == doctest::Approx(sol.objective).epsilon(1e-10));
    }
  }
}

TEST_CASE("exact OT with unequal weights against Sinkhorn and dual feasibility") {
  const auto mu = DiscreteMeasure(random_cloud(9, 2, 3), random_weights(9, 4));
  const auto nu = DiscreteMeasure(random_cloud(7, 2, 5), random_weights(7, 6));
  const auto c = squared_euclidean_cost(mu, nu);
  const auto sol = solve_exact_ot(c, mu.weights(), nu.weights());
  CHECK(sol.plan.marginal_violation() < 1e-12);
  CHECK(sol.plan.cost(c) == doctest::Approx(sol.objective));
  const auto sk = sinkhorn(c, mu.weights(), nu.weights(), 1e-4);
  CHECK(sk.objective >= sol.objective - 1e-9);
  CHECK(sk.objective <= sol.objective + 1e-3);
  // the entropic plan is feasible, so no feasible coupling does better
  CHECK(sk.plan.marginal_violation() < 1e-6);
}

TEST_CASE("warm-started simplex equals cold solves") {
  const auto mu = DiscreteMeasure::uniform(random_cloud(12, 3, 8));
  const auto nu = DiscreteMeasure(random_cloud(10, 3, 9), random_weights(10, 10));
  TransportSimplex ts(mu.weights(), nu.weights());
  for (std::uint64_t s = 0; s < 4; ++s) {
    Vector w = random_cloud(1, 3, 50 + s).row(0).transpose().normalized();
    const auto c = projected_squared_cost(mu, nu, w);
    CHECK(ts.solve(c).objective ==
          doctest::Approx(solve_exact_ot(c, mu.weights(), nu.weights()).objective).epsilon(1e-10));
  }
}

TEST_CASE("one-dimensional quantile oracle") {
  Vector a(3), aw(3), b(2), bw(2);
  a << 0.0, 0.2, 0.9;
  aw << 0.2, 0.5, 0.3;
  b << -0.4, 0.5;
  bw << 0.6, 0.4;
  const auto q = solve_ot_1d(a, aw, b, bw);
  Matrix pa(3, 1), pb(2, 1);
  pa.col(0) = a;
  pb.col(0) = b;
  const DiscreteMeasure mu(pa, aw), nu(pb, bw);
  const auto ex = solve_exact_ot(squared_euclidean_cost(mu, nu), aw, bw);
  CHECK(q.objective == doctest::Approx(ex.objective).epsilon(1e-12));
  CHECK(quantile_w2_1d(mu, nu) == doctest::Approx(std::sqrt(ex.objective)).epsilon(1e-12));
  // embedded on a tilted line in R^3 the value is unchanged
  Vector dir(3);
  dir << 1, 2, 2;
  dir /= 3.0;
  const DiscreteMeasure mu3(pa * dir.transpose(), aw), nu3(pb * dir.transpose(), bw);
  CHECK(quantile_w2_1d(mu3, nu3) == doctest::Approx(std::sqrt(ex.objective)).epsilon(1e-12));
  CHECK(wasserstein(mu3, nu3, 2) == doctest::Approx(std::sqrt(ex.objective)).epsilon(1e-10));
}

TEST_CASE("Wasserstein metric properties") {
  const auto mu = DiscreteMeasure::uniform(random_cloud(5, 2, 21));
  const auto nu = DiscreteMeasure::uniform(random_cloud(6, 2, 22));
  const auto rho = DiscreteMeasure::uniform(random_cloud(4, 2, 23));
  for (int p : {1, 2}) {
    CHECK(wasserstein(mu, mu, p) == doctest::Approx(0.0));
    CHECK(wasserstein(mu, nu, p) == doctest::Approx(wasserstein(nu, mu, p)).epsilon(1e-12));
    CHECK(wasserstein(mu, rho, p) <= wasserstein(mu, nu, p) + wasserstein(nu, rho, p) + 1e-12);
  }
  CHECK(wasserstein(mu, nu, 1) <= wasserstein(mu, nu, 2) + 1e-12);
  CHECK(wasserstein(mu, nu, 2, OtMethod::Sinkhorn) ==
        doctest::Approx(wasserstein(mu, nu, 2)).epsilon(1e-2));
  CHECK_THROWS_AS(wasserstein(mu, nu, 3), InvalidArgument);
}

TEST_CASE("separated-support lower bound") {
  const auto set = greedy_separated_set(3, 1.0 / 3, 12, 77);
  const auto mu = DiscreteMeasure::uniform(set.points);
  Vector w = random_weights(static_cast<int>(set.points.rows()), 78);
  const DiscreteMeasure nu(set.points, w);
  const double lb = separated_w1_lower_bound(set, mu.weights(), w);
  const double expect = set.epsilon / 2 * (mu.weights() - w).cwiseAbs().sum();
  CHECK(lb == doctest::Approx(expect));
  CHECK(lb <= wasserstein(mu, nu, 1) + 1e-12);
}

TEST_CASE("input validation") {
  const auto mu = DiscreteMeasure::uniform(random_cloud(3, 2, 1));
  const auto nu = DiscreteMeasure::uniform(random_cloud(4, 2, 2));
  const auto c = squared_euclidean_cost(mu, nu);
  CHECK_THROWS_AS(solve_exact_ot(c, nu.weights(), mu.weights()), InvalidArgument);
  Vector bad = mu.weights();
  bad(0) += 0.1;
  CHECK_THROWS_AS(solve_exact_ot(c, bad, nu.weights()), InvalidArgument);
  CostMatrix neg = c;
  neg.entries(0, 0) = -1.0;
  CHECK_THROWS_AS(validate_cost(neg), InvalidArgument);
  Matrix plan = Matrix::Constant(3, 4, 1.0 / 12);
  CHECK_NOTHROW(Coupling::from_dense(plan, mu.weights(), nu.weights()).check_marginals());
  plan(0, 0) += 0.01;
  CHECK_THROWS_AS(Coupling::from_dense(plan, mu.weights(), nu.weights()).check_marginals(),
                  NumericalError);
}
