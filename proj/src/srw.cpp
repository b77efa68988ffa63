#include "srwrate/srw.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <limits>
#include <optional>
#include <unordered_map>
#include <vector>

#include "srwrate/errors.hpp"
#include "srw_internal.hpp"

namespace srwrate {

namespace {

constexpr double kGolden = 0.6180339887498949;
constexpr Eigen::Index kInteriorPointMaxRows = 1000;
constexpr Eigen::Index kInteriorPointMaxDim = 24;

double softplus(double x) { return x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x)); }

// Eigen-weights of the smoothed top-k sum: p_i = sigmoid((lambda_i - tau) / beta)
// with tau chosen so that sum p = k. beta == 0 gives the hard top-k indicator.
struct SoftWeights {
  Vector p;
  double value = 0.0;  // sum p_i lambda_i + beta * sum H(p_i)
};

SoftWeights soft_topk(const Vector& lambda, int k, double beta) {
  const auto n = lambda.size();
  SoftWeights out;
  out.p = Vector::Zero(n);
  if (beta <= 0.0 || k == n) {
    out.p.head(k).setOnes();
    out.value = lambda.head(k).sum();
    return out;
  }
  auto mass = [&](double tau) {
    double s = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) s += 1.0 / (1.0 + std::exp(-(lambda[i] - tau) / beta));
    return s;
  };
  double lo = lambda.minCoeff() - 60.0 * beta - 1.0;
  double hi = lambda.maxCoeff() + 60.0 * beta + 1.0;
  for (int it = 0; it < 200 && hi - lo > 1e-15 * (1.0 + std::abs(hi)); ++it) {
    const double mid = 0.5 * (lo + hi);
    (mass(mid) > k ? lo : hi) = mid;
  }
  const double tau = 0.5 * (lo + hi);
  double entropy = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double z = (lambda[i] - tau) / beta;
    const double p = 1.0 / (1.0 + std::exp(-z));
    out.p[i] = p;
    entropy += p * softplus(-z) + (1.0 - p) * softplus(z);
  }
  // Keep sum p <= k so <Omega, V> <= top-k sum holds for every PSD V.
  const double total = out.p.sum();
  if (total > k) out.p *= static_cast<double>(k) / total;
  out.value = out.p.dot(lambda) + beta * entropy;
  return out;
}

struct Vertex {
  std::vector<PlanEntry> entries;
  double weight = 0.0;
};

std::uint64_t hash_entries(const std::vector<PlanEntry>& entries) {
  std::uint64_t h = 0xCBF29CE484222325ULL;
  for (const auto& e : entries) {
    std::uint64_t bits = 0;
    std::memcpy(&bits, &e.mass, sizeof bits);
    for (std::uint64_t v : {static_cast<std::uint64_t>(e.row), static_cast<std::uint64_t>(e.col),
                            bits}) {
      h ^= v + 0x9E3779B97F4A7C15ULL + (h << 6) + (h >> 2);
    }
  }
  return h;
}

bool same_entries(const std::vector<PlanEntry>& a, const std::vector<PlanEntry>& b) {
  return std::equal(a.begin(), a.end(), b.begin(), b.end(), [](const PlanEntry& x, const PlanEntry& y) {
    return x.row == y.row && x.col == y.col && x.mass == y.mass;
  });
}

class FrankWolfe {
 public:
  FrankWolfe(const DiscreteMeasure& mu, const DiscreteMeasure& nu, int k, const SrwOptions& opts)
      : mu_(mu), nu_(nu), k_(k), opts_(opts), dim_(mu.dim()) {}

  SrwResult run();

 private:
  Matrix plan_moment(const std::vector<PlanEntry>& entries) const;
  Matrix product_moment() const;
  SpectralDecomposition eig(const Matrix& v);
  double smoothed_value(const Matrix& v, double beta);
  double line_search(const Matrix& v, const Matrix& vs, double beta);
  OtSolution linear_oracle(const Matrix& factor);
  void add_vertex(std::vector<PlanEntry> entries, double gamma);
  Coupling materialize() const;

  const DiscreteMeasure& mu_;
  const DiscreteMeasure& nu_;
  int k_;
  SrwOptions opts_;
  Eigen::Index dim_;

  Matrix warm_;
  std::optional<TransportSimplex> simplex_;
  std::vector<Vertex> vertices_;
  std::unordered_multimap<std::uint64_t, std::size_t> vertex_index_;
  double product_weight_ = 1.0;
};

Matrix FrankWolfe::plan_moment(const std::vector<PlanEntry>& entries) const {
  Matrix rows(static_cast<Eigen::Index>(entries.size()), dim_);
  for (std::size_t r = 0; r < entries.size(); ++r) {
    const auto& e = entries[r];
    rows.row(static_cast<Eigen::Index>(r)) =
        std::sqrt(e.mass) * (mu_.points().row(e.row) - nu_.points().row(e.col));
  }
  Matrix v = rows.transpose() * rows;
  return 0.5 * (v + v.transpose());
}

Matrix FrankWolfe::product_moment() const {
  const Vector mx = mu_.points().transpose() * mu_.weights();
  const Vector my = nu_.points().transpose() * nu_.weights();
  Matrix v = mu_.second_moment() + nu_.second_moment() - mx * my.transpose() - my * mx.transpose();
  return 0.5 * (v + v.transpose());
}

SpectralDecomposition FrankWolfe::eig(const Matrix& v) {
  auto out = jacobi_eigen(SymmetricMatrix(v), {}, warm_.size() > 0 ? &warm_ : nullptr);
  warm_ = out.eigenvectors;
  return out;
}

double FrankWolfe::smoothed_value(const Matrix& v, double beta) {
  const auto e = jacobi_eigen(SymmetricMatrix(v), {}, warm_.size() > 0 ? &warm_ : nullptr);
  return soft_topk(e.eigenvalues, k_, beta).value;
}

double FrankWolfe::line_search(const Matrix& v, const Matrix& vs, double beta) {
  auto phi = [&](double g) { return smoothed_value((1.0 - g) * v + g * vs, beta); };
  double a = 0.0, b = 1.0;
  double x1 = b - kGolden * (b - a), x2 = a + kGolden * (b - a);
  double f1 = phi(x1), f2 = phi(x2);
  for (int it = 0; it < 60 && b - a > 1e-12; ++it) {
    if (f1 <= f2) {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - kGolden * (b - a);
      f1 = phi(x1);
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + kGolden * (b - a);
      f2 = phi(x2);
    }
  }
  double best_g = f1 <= f2 ? x1 : x2;
  double best_f = std::min(f1, f2);
  // Endpoints matter: a full step onto a vertex is often exactly optimal.
  for (const double g : {0.0, 1.0}) {
    const double f = phi(g);
    if (f <= best_f) {
      best_f = f;
      best_g = g;
    }
  }
  return best_g;
}

OtSolution FrankWolfe::linear_oracle(const Matrix& factor) {
  if (factor.cols() == 1) {
    const Vector a = mu_.points() * factor.col(0);
    const Vector b = nu_.points() * factor.col(0);
    return solve_ot_1d(a, mu_.weights(), b, nu_.weights());
  }
  if (!simplex_) simplex_.emplace(mu_.weights(), nu_.weights());
  return simplex_->solve(factored_quadratic_cost(mu_, nu_, factor));
}

void FrankWolfe::add_vertex(std::vector<PlanEntry> entries, double gamma) {
  product_weight_ *= 1.0 - gamma;
  for (auto& v : vertices_) v.weight *= 1.0 - gamma;
  if (!opts_.keep_coupling) return;
  const auto h = hash_entries(entries);
  const auto [lo, hi] = vertex_index_.equal_range(h);
  for (auto it = lo; it != hi; ++it) {
    if (same_entries(vertices_[it->second].entries, entries)) {
      vertices_[it->second].weight += gamma;
      return;
    }
  }
  vertex_index_.emplace(h, vertices_.size());
  vertices_.push_back({std::move(entries), gamma});
}

Coupling FrankWolfe::materialize() const {
  std::vector<PlanEntry> all;
  if (product_weight_ > 0.0) {
    for (Eigen::Index i = 0; i < mu_.size(); ++i) {
      for (Eigen::Index j = 0; j < nu_.size(); ++j) {
        all.push_back({i, j, product_weight_ * mu_.weights()[i] * nu_.weights()[j]});
      }
    }
  }
  for (const auto& v : vertices_) {
    if (v.weight <= 0.0) continue;
    for (const auto& e : v.entries) all.push_back({e.row, e.col, v.weight * e.mass});
  }
  return Coupling(std::move(all), mu_.weights(), nu_.weights());
}

SrwResult FrankWolfe::run() {
  const bool smoothed = opts_.linearization == SrwLinearization::Smoothed;
  Matrix v = product_moment();
  double best_lower = 0.0;
  double beta = 0.0;
  int iter = 0;
  bool converged = false;

  for (; iter < opts_.max_iters; ++iter) {
    if (!v.allFinite()) throw NumericalError("non-finite displacement moment in Frank-Wolfe");
    const auto e = eig(v);
    const double f = topk_eigensum(e, k_).value;
    if (f <= 0.0) {  // V == 0: nothing left to transport
      best_lower = 0.0;
      converged = true;
      break;
    }
    if (smoothed && iter == 0) beta = std::max(f, 1e-300) / (4.0 * static_cast<double>(dim_));
    const double floor_beta = 1e-3 * opts_.tol * std::max(1.0, f) / static_cast<double>(dim_);

    const SoftWeights w = soft_topk(e.eigenvalues, k_, smoothed ? beta : 0.0);
    std::vector<Eigen::Index> keep;
    for (Eigen::Index i = 0; i < w.p.size(); ++i) {
      if (w.p[i] > 1e-14) keep.push_back(i);
    }
    Matrix factor(dim_, static_cast<Eigen::Index>(keep.size()));
    for (std::size_t c = 0; c < keep.size(); ++c) {
      factor.col(static_cast<Eigen::Index>(c)) = std::sqrt(w.p[keep[c]]) * e.eigenvectors.col(keep[c]);
    }

    OtSolution s = linear_oracle(factor);
    const double lower = s.objective;
    best_lower = std::max(best_lower, lower);
    if (f - best_lower <= opts_.tol * std::max(1.0, f)) {
      converged = true;
      break;
    }

    const Matrix vs = plan_moment(s.plan.entries());
    double gamma = 2.0 / (iter + 2.0);
    if (opts_.step == SrwStep::LineSearch) gamma = line_search(v, vs, smoothed ? beta : 0.0);

    if (smoothed) {
      const double smooth_gap = w.p.dot(e.eigenvalues) - lower;
      if (smooth_gap <= beta || gamma == 0.0) beta = std::max(0.25 * beta, floor_beta);
    }

    v = (1.0 - gamma) * v + gamma * vs;
    v = (0.5 * (v + v.transpose())).eval();
    add_vertex(s.plan.entries(), gamma);
  }

  SrwResult out;
  out.k = k_;
  out.iterations = iter;
  out.converged = converged;
  if (opts_.keep_coupling) {
    out.coupling = materialize();
    out.coupling.check_marginals(1e-9);
    v = plan_moment(out.coupling.entries());
  }
  const auto e = jacobi_eigen(SymmetricMatrix(v));
  const TopK top = topk_eigensum(e, k_);
  if (top.value <= 0.0) {
    out.distance = 0.0;
    out.witness_basis = Matrix::Identity(dim_, k_);
  } else {
    out.distance = std::sqrt(top.value);
    out.witness_basis = top.basis;
  }
  out.lower_bound = best_lower;
  out.fw_gap = std::max(top.value, 0.0) - best_lower;
  if (!std::isfinite(out.distance) || !std::isfinite(out.fw_gap)) {
    throw NumericalError("Frank-Wolfe produced a non-finite result");
  }
  return out;
}

}  // namespace

SymmetricMatrix displacement_second_moment(const DiscreteMeasure& mu, const DiscreteMeasure& nu,
                                           const Coupling& pi) {
  if (mu.dim() != nu.dim()) throw InvalidArgument("dimension mismatch");
  if (pi.rows() != mu.size() || pi.cols() != nu.size()) {
    throw InvalidArgument("coupling shape does not match the measures");
  }
  const double row_err = (pi.row_sums() - mu.weights()).cwiseAbs().maxCoeff();
  const double col_err = (pi.col_sums() - nu.weights()).cwiseAbs().maxCoeff();
  if (row_err > 1e-9 || col_err > 1e-9) {
    throw InvalidArgument("coupling marginals do not match the measures");
  }
  Matrix v = Matrix::Zero(mu.dim(), mu.dim());
  for (const auto& e : pi.entries()) {
    const Vector d = (mu.points().row(e.row) - nu.points().row(e.col)).transpose();
    v.noalias() += e.mass * d * d.transpose();
  }
  return SymmetricMatrix(0.5 * (v + v.transpose()));
}

SrwResult srw_distance(const DiscreteMeasure& mu, const DiscreteMeasure& nu, int k,
                       const SrwOptions& opts) {
  if (mu.dim() != nu.dim()) {
    throw InvalidArgument("dimension mismatch: " + std::to_string(mu.dim()) + " vs " +
                          std::to_string(nu.dim()));
  }
  if (k < 1 || k > mu.dim()) {
    throw InvalidArgument("k = " + std::to_string(k) + " outside [1, " + std::to_string(mu.dim()) +
                          "]");
  }
  if (!(opts.tol > 0.0) || opts.max_iters < 1) {
    throw InvalidArgument("srw_distance needs tol > 0 and max_iters >= 1");
  }
  bool interior = opts.method == SrwMethod::InteriorPoint;
  if (opts.method == SrwMethod::Auto) {
    const Eigen::Index d = mu.dim();
    interior = d <= kInteriorPointMaxDim && mu.size() + nu.size() + d * (d + 1) / 2 <= kInteriorPointMaxRows;
  }
  if (interior) return detail::srw_interior_point(mu, nu, k, opts);
  return FrankWolfe(mu, nu, k, opts).run();
}

SrwResult s1_distance(const DiscreteMeasure& mu, const DiscreteMeasure& nu,
                      const SrwOptions& opts) {
  return srw_distance(mu, nu, 1, opts);
}

double projection_residual_bound(const DiscreteMeasure& mu, const Matrix& basis) {
  if (basis.rows() != mu.dim()) throw InvalidArgument("basis dimension does not match measure");
  check_orthonormal(basis);
  const Matrix residual = Matrix::Identity(mu.dim(), mu.dim()) - basis * basis.transpose();
  const Matrix s = residual * mu.second_moment() * residual;
  const double top = max_eigenvalue(SymmetricMatrix(0.5 * (s + s.transpose())));
  return std::sqrt(std::max(top, 0.0));
}

}  // namespace srwrate
