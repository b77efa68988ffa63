#include "srwrate/ot.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "srwrate/errors.hpp"
#include "srwrate/io.hpp"

namespace srwrate {

namespace {

// Exact pairwise squared distances between the rows of a and b, computed from
// differences so coincident points give exactly 0.
Matrix pairwise_sq_dist(const Matrix& a, const Matrix& b) {
  Matrix out(a.rows(), b.rows());
  const Eigen::Index r = a.cols();
  for (Eigen::Index j = 0; j < b.rows(); ++j) {
    for (Eigen::Index i = 0; i < a.rows(); ++i) {
      double s = 0.0;
      for (Eigen::Index c = 0; c < r; ++c) {
        const double d = a(i, c) - b(j, c);
        s += d * d;
      }
      out(i, j) = s;
    }
  }
  return out;
}

void require_same_dim(const DiscreteMeasure& mu, const DiscreteMeasure& nu) {
  if (mu.dim() != nu.dim()) {
    throw InvalidArgument("dimension mismatch: " + std::to_string(mu.dim()) + " vs " +
                          std::to_string(nu.dim()));
  }
}

constexpr Eigen::Index kSinkhornNewtonMaxCols = 2000;

double log_sum_exp(const double* x, Eigen::Index n, Eigen::Index stride) {
  double hi = -std::numeric_limits<double>::infinity();
  for (Eigen::Index k = 0; k < n; ++k) hi = std::max(hi, x[k * stride]);
  if (!std::isfinite(hi)) return hi;
  double s = 0.0;
  for (Eigen::Index k = 0; k < n; ++k) s += std::exp(x[k * stride] - hi);
  return hi + std::log(s);
}

}  // namespace

// ---------------------------------------------------------------------------
// Costs

void validate_cost(const CostMatrix& cost) {
  if (!cost.entries.allFinite()) throw InvalidArgument("cost matrix has NaN or Inf entries");
  if (cost.entries.size() > 0 && cost.entries.minCoeff() < 0.0) {
    throw InvalidArgument("cost matrix has negative entries");
  }
}

CostMatrix euclidean_cost(const DiscreteMeasure& mu, const DiscreteMeasure& nu) {
  require_same_dim(mu, nu);
  return {pairwise_sq_dist(mu.points(), nu.points()).cwiseSqrt(), CostKind::EuclideanP1};
}

CostMatrix squared_euclidean_cost(const DiscreteMeasure& mu, const DiscreteMeasure& nu) {
  require_same_dim(mu, nu);
  return {pairwise_sq_dist(mu.points(), nu.points()), CostKind::SquaredEuclidean};
}

CostMatrix projected_squared_cost(const DiscreteMeasure& mu, const DiscreteMeasure& nu,
                                  const Matrix& basis) {
  require_same_dim(mu, nu);
  if (basis.rows() != mu.dim()) throw InvalidArgument("basis dimension does not match measures");
  check_orthonormal(basis);
  return {pairwise_sq_dist(mu.points() * basis, nu.points() * basis), CostKind::ProjectedSquared};
}

CostMatrix factored_quadratic_cost(const DiscreteMeasure& mu, const DiscreteMeasure& nu,
                                   const Matrix& factor) {
  require_same_dim(mu, nu);
  if (factor.rows() != mu.dim()) throw InvalidArgument("factor dimension does not match measures");
  return {pairwise_sq_dist(mu.points() * factor, nu.points() * factor), CostKind::Custom};
}

// ---------------------------------------------------------------------------
// Coupling

Coupling::Coupling(std::vector<PlanEntry> entries, Vector row_marginal, Vector col_marginal)
    : row_marginal_(std::move(row_marginal)), col_marginal_(std::move(col_marginal)) {
  for (const auto& e : entries) {
    if (e.row < 0 || e.row >= rows() || e.col < 0 || e.col >= cols()) {
      throw InvalidArgument("coupling entry index out of range");
    }
    if (!std::isfinite(e.mass) || e.mass < -1e-15) {
      throw NumericalError("coupling entry has negative or non-finite mass");
    }
  }
  std::sort(entries.begin(), entries.end(), [](const PlanEntry& a, const PlanEntry& b) {
    return a.row != b.row ? a.row < b.row : a.col < b.col;
  });
  entries_.reserve(entries.size());
  for (const auto& e : entries) {
    if (e.mass <= 0.0) continue;
    if (!entries_.empty() && entries_.back().row == e.row && entries_.back().col == e.col) {
      entries_.back().mass += e.mass;
    } else {
      entries_.push_back(e);
    }
  }
}

Coupling Coupling::product(const Vector& row_marginal, const Vector& col_marginal) {
  std::vector<PlanEntry> entries;
  entries.reserve(static_cast<std::size_t>(row_marginal.size() * col_marginal.size()));
  for (Eigen::Index i = 0; i < row_marginal.size(); ++i) {
    for (Eigen::Index j = 0; j < col_marginal.size(); ++j) {
      entries.push_back({i, j, row_marginal[i] * col_marginal[j]});
    }
  }
  return Coupling(std::move(entries), row_marginal, col_marginal);
}

Coupling Coupling::from_dense(const Matrix& plan, Vector row_marginal, Vector col_marginal) {
  if (plan.rows() != row_marginal.size() || plan.cols() != col_marginal.size()) {
    throw InvalidArgument("dense plan shape does not match marginals");
  }
  std::vector<PlanEntry> entries;
  for (Eigen::Index i = 0; i < plan.rows(); ++i) {
    for (Eigen::Index j = 0; j < plan.cols(); ++j) {
      if (plan(i, j) > 0.0) entries.push_back({i, j, plan(i, j)});
      else if (plan(i, j) < -1e-15) throw NumericalError("dense plan has a negative entry");
    }
  }
  return Coupling(std::move(entries), std::move(row_marginal), std::move(col_marginal));
}

Matrix Coupling::dense() const {
  Matrix out = Matrix::Zero(rows(), cols());
  for (const auto& e : entries_) out(e.row, e.col) += e.mass;
  return out;
}

Vector Coupling::row_sums() const {
  Vector s = Vector::Zero(rows());
  for (const auto& e : entries_) s[e.row] += e.mass;
  return s;
}

Vector Coupling::col_sums() const {
  Vector s = Vector::Zero(cols());
  for (const auto& e : entries_) s[e.col] += e.mass;
  return s;
}

double Coupling::marginal_violation() const {
  const double r = (row_sums() - row_marginal_).cwiseAbs().maxCoeff();
  const double c = (col_sums() - col_marginal_).cwiseAbs().maxCoeff();
  return std::max(r, c);
}

void Coupling::check_marginals(double tol) const {
  const double v = marginal_violation();
  if (!(v <= tol)) {
    throw NumericalError("coupling marginals off by " + format_double(v) + " (tolerance " +
                         format_double(tol) + ")");
  }
}

double Coupling::cost(const CostMatrix& c) const {
  if (c.rows() != rows() || c.cols() != cols()) throw InvalidArgument("cost shape mismatch");
  double s = 0.0;
  for (const auto& e : entries_) s += e.mass * c.entries(e.row, e.col);
  return s;
}

// ---------------------------------------------------------------------------
// One-dimensional OT

OtSolution solve_ot_1d(const Vector& a, const Vector& a_w, const Vector& b, const Vector& b_w) {
  if (a.size() != a_w.size() || b.size() != b_w.size()) {
    throw InvalidArgument("1-D OT: value/weight length mismatch");
  }
  if (a.size() == 0 || b.size() == 0) throw InvalidArgument("1-D OT: empty input");
  auto order = [](const Vector& v) {
    std::vector<Eigen::Index> idx(static_cast<std::size_t>(v.size()));
    std::iota(idx.begin(), idx.end(), Eigen::Index{0});
    std::stable_sort(idx.begin(), idx.end(),
                     [&](Eigen::Index x, Eigen::Index y) { return v[x] < v[y]; });
    return idx;
  };
  const auto ia = order(a);
  const auto ib = order(b);

  std::vector<PlanEntry> entries;
  entries.reserve(ia.size() + ib.size());
  double objective = 0.0;
  std::size_t p = 0, q = 0;
  long double ra = a_w[ia[0]], rb = b_w[ib[0]];
  while (p < ia.size() && q < ib.size()) {
    if (ra <= 0.0L) {
      if (++p < ia.size()) ra = a_w[ia[p]];
      continue;
    }
    if (rb <= 0.0L) {
      if (++q < ib.size()) rb = b_w[ib[q]];
      continue;
    }
    const long double moved = std::min(ra, rb);
    const double d = a[ia[p]] - b[ib[q]];
    entries.push_back({ia[p], ib[q], static_cast<double>(moved)});
    objective += static_cast<double>(moved) * d * d;
    ra -= moved;
    rb -= moved;
    // Ties consume both sides at once so round-off never leaves a sliver.
    if (ra <= 0.0L || (p + 1 < ia.size() && ra < 1e-15L)) {
      if (++p < ia.size()) ra = a_w[ia[p]];
    }
    if (rb <= 0.0L || (q + 1 < ib.size() && rb < 1e-15L)) {
      if (++q < ib.size()) rb = b_w[ib[q]];
    }
  }
  Coupling plan(std::move(entries), a_w, b_w);
  return {std::move(plan), objective};
}

// ---------------------------------------------------------------------------
// Wasserstein distances

double wasserstein(const DiscreteMeasure& mu, const DiscreteMeasure& nu, int p, OtMethod method) {
  require_same_dim(mu, nu);
  if (p != 1 && p != 2) throw InvalidArgument("only p = 1 and p = 2 are supported");
  const CostMatrix cost = p == 1 ? euclidean_cost(mu, nu) : squared_euclidean_cost(mu, nu);
  double objective = 0.0;
  if (method == OtMethod::Exact) {
    objective = solve_exact_ot(cost, mu.weights(), nu.weights()).objective;
  } else {
    const double scale = std::max(cost.entries.maxCoeff(), 1e-12);
    objective = sinkhorn(cost, mu.weights(), nu.weights(), 1e-3 * scale).objective;
  }
  objective = std::max(objective, 0.0);
  return p == 1 ? objective : std::sqrt(objective);
}

OtSolution sinkhorn(const CostMatrix& cost, const Vector& mu_w, const Vector& nu_w, double reg,
                    const SinkhornOptions& opts) {
  if (!(reg > 0.0) || !std::isfinite(reg)) throw InvalidArgument("Sinkhorn needs reg > 0");
  if (cost.rows() != mu_w.size() || cost.cols() != nu_w.size()) {
    throw InvalidArgument("cost matrix shape does not match the weight vectors");
  }
  validate_cost(cost);

  std::vector<Eigen::Index> rows, cols;
  for (Eigen::Index i = 0; i < mu_w.size(); ++i) {
    if (mu_w[i] > 0.0) rows.push_back(i);
  }
  for (Eigen::Index j = 0; j < nu_w.size(); ++j) {
    if (nu_w[j] > 0.0) cols.push_back(j);
  }
  const auto n = static_cast<Eigen::Index>(rows.size());
  const auto m = static_cast<Eigen::Index>(cols.size());
  if (n == 0 || m == 0) throw InvalidArgument("Sinkhorn: a marginal has no mass");

  Matrix c(n, m);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < m; ++j) c(i, j) = cost.entries(rows[i], cols[j]);
  }
  Vector a(n), b(m), log_a(n), log_b(m);
  for (Eigen::Index i = 0; i < n; ++i) a[i] = mu_w[rows[i]];
  for (Eigen::Index j = 0; j < m; ++j) b[j] = nu_w[cols[j]];
  log_a = a.array().log();
  log_b = b.array().log();

  Vector f = Vector::Zero(n), g = Vector::Zero(m);
  Matrix work(n, m);
  // Row violation (L1); columns are exact right after a g-update.
  auto row_violation = [&](double eps) {
    double v = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      double r = 0.0;
      for (Eigen::Index j = 0; j < m; ++j) r += std::exp((f[i] + g[j] - c(i, j)) / eps);
      v += std::abs(r - a[i]);
    }
    if (!std::isfinite(v)) throw NumericalError("Sinkhorn produced non-finite values");
    return v;
  };
  auto sweep = [&](double eps) {
    for (Eigen::Index j = 0; j < m; ++j) work.col(j) = (g[j] - c.col(j).array()) / eps;
    for (Eigen::Index i = 0; i < n; ++i) {
      f[i] = eps * (log_a[i] - log_sum_exp(work.data() + i, m, n));
    }
    for (Eigen::Index j = 0; j < m; ++j) {
      work.col(j) = (f.array() - c.col(j).array()) / eps;
      g[j] = eps * (log_b[j] - log_sum_exp(work.col(j).data(), n, 1));
    }
  };

  // Epsilon scaling: solve coarse problems first and carry the potentials down.
  std::size_t it = 0;
  if (opts.epsilon_scaling) {
    const double top = c.maxCoeff();
    for (double eps = top; eps > reg && it < opts.max_iters; eps *= 0.5) {
      for (int inner = 0; inner < 50 && it < opts.max_iters; ++inner, ++it) sweep(eps);
    }
  }
  double violation = std::numeric_limits<double>::infinity();
  double checkpoint = violation;
  bool stalled = false;
  for (; it < opts.max_iters; ++it) {
    sweep(reg);
    if (it % 10 == 9 || it + 1 == opts.max_iters) {
      violation = row_violation(reg);
      if (violation <= opts.tol) break;
    }
    if (it % 500 == 499) {
      if (violation > 0.9 * checkpoint) {
        stalled = true;
        break;
      }
      checkpoint = violation;
    }
  }

  // Near-degenerate instances make the Sinkhorn contraction arbitrarily slow;
  // finish with damped Newton on the semi-dual in g (f eliminated, rows exact).
  if (stalled && m <= kSinkhornNewtonMaxCols) {
    Matrix plan(n, m);
    auto eliminate = [&](const Vector& gg) {
      Vector ff(n);
      for (Eigen::Index j = 0; j < m; ++j) work.col(j) = (gg[j] - c.col(j).array()) / reg;
      for (Eigen::Index i = 0; i < n; ++i) {
        ff[i] = reg * (log_a[i] - log_sum_exp(work.data() + i, m, n));
      }
      return ff;
    };
    auto semi_dual = [&](const Vector& gg, const Vector& ff) { return b.dot(gg) + a.dot(ff); };
    for (int step = 0; step < 100; ++step) {
      f = eliminate(g);
      for (Eigen::Index j = 0; j < m; ++j) {
        plan.col(j) = ((f.array() + g[j] - c.col(j).array()) / reg).exp();
      }
      const Vector colsum = plan.colwise().sum().transpose();
      const Vector grad = b - colsum;
      violation = grad.cwiseAbs().sum();
      if (!std::isfinite(violation)) throw NumericalError("Sinkhorn produced non-finite values");
      if (violation <= opts.tol) break;
      // Hessian of the negated semi-dual; the all-ones direction is a gauge, so
      // g_{m-1} stays fixed.
      Matrix h = -(plan.transpose() * a.cwiseInverse().asDiagonal() * plan);
      h.diagonal() += colsum;
      h /= reg;
      const Eigen::Index r = m - 1;
      Vector delta = Vector::Zero(m);
      // Blocks of underflowed plan entries make h nearly singular: damp it
      // slightly and cap the step at a few multiples of reg.
      h.diagonal().array() += 1e-10 * h.diagonal().maxCoeff();
      if (r > 0) delta.head(r) = h.topLeftCorner(r, r).ldlt().solve(grad.head(r));
      if (!delta.allFinite()) break;
      const double cap = 20.0 * reg;
      if (delta.cwiseAbs().maxCoeff() > cap) delta *= cap / delta.cwiseAbs().maxCoeff();
      const double base = semi_dual(g, f);
      double t = 1.0;
      for (; t > 1e-10; t *= 0.5) {
        const Vector trial = g + t * delta;
        if (semi_dual(trial, eliminate(trial)) >= base + 1e-4 * t * grad.dot(delta)) break;
      }
      if (!(t > 1e-10)) break;
      g += t * delta;
    }
    f = eliminate(g);
    violation = 0.0;
    for (Eigen::Index j = 0; j < m; ++j) {
      violation += std::abs(((f.array() + g[j] - c.col(j).array()) / reg).exp().sum() - b[j]);
    }
  }
  if (!(violation <= opts.tol)) {
    throw ConvergenceError("Sinkhorn did not converge in " + std::to_string(opts.max_iters) +
                               " iterations",
                           violation);
  }

  std::vector<PlanEntry> entries;
  double objective = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < m; ++j) {
      const double p = std::exp((f[i] + g[j] - c(i, j)) / reg);
      if (p > 0.0) {
        entries.push_back({rows[i], cols[j], p});
        objective += p * c(i, j);
      }
    }
  }
  Coupling plan(std::move(entries), mu_w, nu_w);
  plan.check_marginals(std::max(opts.tol, 1e-9));
  return {std::move(plan), objective};
}

double quantile_w2_1d(const DiscreteMeasure& mu, const DiscreteMeasure& nu) {
  require_same_dim(mu, nu);
  const Vector base = mu.points().row(0).transpose();
  Vector dir = Vector::Zero(mu.dim());
  double far = 0.0;
  for (const Matrix* pts : {&mu.points(), &nu.points()}) {
    for (Eigen::Index i = 0; i < pts->rows(); ++i) {
      const double r = (pts->row(i).transpose() - base).norm();
      if (r > far) {
        far = r;
        dir = (pts->row(i).transpose() - base) / r;
      }
    }
  }
  if (far == 0.0) return 0.0;
  for (const Matrix* pts : {&mu.points(), &nu.points()}) {
    for (Eigen::Index i = 0; i < pts->rows(); ++i) {
      const Vector rel = pts->row(i).transpose() - base;
      if ((rel - rel.dot(dir) * dir).norm() > 1e-10) {
        throw InvalidArgument("quantile_w2_1d: supports are not collinear");
      }
    }
  }
  const Vector a = (mu.points().rowwise() - base.transpose()) * dir;
  const Vector b = (nu.points().rowwise() - base.transpose()) * dir;
  return std::sqrt(std::max(solve_ot_1d(a, mu.weights(), b, nu.weights()).objective, 0.0));
}

double separated_w1_lower_bound(const SeparatedSet& set, const Vector& mu_w, const Vector& nu_w) {
  if (mu_w.size() != set.points.rows() || nu_w.size() != set.points.rows()) {
    throw InvalidArgument("weights must have one entry per separated point");
  }
  return 0.5 * set.epsilon * (mu_w - nu_w).cwiseAbs().sum();
}

GridResult brute_coupling_grid(const DiscreteMeasure& mu, const DiscreteMeasure& nu,
                               const std::function<double(const Matrix&)>& objective,
                               std::size_t grid_steps) {
  auto is_uniform_pair = [](const DiscreteMeasure& m) {
    return m.size() == 2 && std::abs(m.weights()[0] - 0.5) <= 1e-12 &&
           std::abs(m.weights()[1] - 0.5) <= 1e-12;
  };
  if (!is_uniform_pair(mu) || !is_uniform_pair(nu)) {
    throw InvalidArgument("brute_coupling_grid needs two uniform 2-atom measures");
  }
  if (grid_steps < 1) throw InvalidArgument("grid_steps must be positive");
  GridResult best;
  best.best_value = std::numeric_limits<double>::infinity();
  Matrix plan(2, 2);
  for (std::size_t k = 0; k <= grid_steps; ++k) {
    const double t = 0.5 * static_cast<double>(k) / static_cast<double>(grid_steps);
    plan << t, 0.5 - t, 0.5 - t, t;
    const double v = objective(plan);
    if (v < best.best_value) {
      best.best_value = v;
      best.best_t = t;
      best.best_plan = plan;
    }
  }
  return best;
}

}  // namespace srwrate
