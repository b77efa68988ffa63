#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "srwrate/measures.hpp"

namespace srwrate {

enum class CostKind { EuclideanP1, SquaredEuclidean, ProjectedSquared, Custom };

/// Dense nonnegative n x m cost table.
struct CostMatrix {
  Matrix entries;
  CostKind kind = CostKind::Custom;

  Eigen::Index rows() const noexcept { return entries.rows(); }
  Eigen::Index cols() const noexcept { return entries.cols(); }
  double operator()(Eigen::Index i, Eigen::Index j) const { return entries(i, j); }
};

/// ||x_i - y_j||.
CostMatrix euclidean_cost(const DiscreteMeasure& mu, const DiscreteMeasure& nu);
/// ||x_i - y_j||^2.
CostMatrix squared_euclidean_cost(const DiscreteMeasure& mu, const DiscreteMeasure& nu);
/// ||P (x_i - y_j)||^2 with P the projector onto span(basis columns).
CostMatrix projected_squared_cost(const DiscreteMeasure& mu, const DiscreteMeasure& nu,
                                  const Matrix& basis);
/// ||F^T (x_i - y_j)||^2, i.e. the quadratic form of F F^T, for a D x r factor F.
CostMatrix factored_quadratic_cost(const DiscreteMeasure& mu, const DiscreteMeasure& nu,
                                   const Matrix& factor);
/// Throws InvalidArgument on negative or non-finite entries.
void validate_cost(const CostMatrix& cost);

struct PlanEntry {
  Eigen::Index row;
  Eigen::Index col;
  double mass;
};

/// Transport plan stored sparsely (sorted by row, then column; no duplicates).
class Coupling {
 public:
  Coupling() = default;
  Coupling(std::vector<PlanEntry> entries, Vector row_marginal, Vector col_marginal);

  /// Product coupling mu_w (x) nu_w.
  static Coupling product(const Vector& row_marginal, const Vector& col_marginal);
  /// Convert a dense plan; entries <= 0 are dropped.
  static Coupling from_dense(const Matrix& plan, Vector row_marginal, Vector col_marginal);

  Eigen::Index rows() const noexcept { return row_marginal_.size(); }
  Eigen::Index cols() const noexcept { return col_marginal_.size(); }
  const std::vector<PlanEntry>& entries() const noexcept { return entries_; }
  const Vector& row_marginal() const noexcept { return row_marginal_; }
  const Vector& col_marginal() const noexcept { return col_marginal_; }

  Matrix dense() const;
  Vector row_sums() const;
  Vector col_sums() const;
  /// max(|row sums - row marginal|_inf, |col sums - col marginal|_inf).
  double marginal_violation() const;
  /// Throws NumericalError if the marginal violation exceeds `tol`.
  void check_marginals(double tol = 1e-9) const;
  double cost(const CostMatrix& c) const;

 private:
  std::vector<PlanEntry> entries_;
  Vector row_marginal_;
  Vector col_marginal_;
};

struct OtSolution {
  Coupling plan;
  double objective = 0.0;
};

enum class PivotRule { BlockSearch, Bland };

struct ExactOtOptions {
  PivotRule pivot = PivotRule::BlockSearch;
  /// Upper bound on simplex pivots; 0 picks a size-dependent default.
  std::size_t max_pivots = 0;
};

/// Exact transport LP by the primal network simplex on the bipartite graph,
/// with strongly feasible spanning trees (anti-cycling). Zero-weight atoms are
/// removed before solving and come back as empty rows/columns. The result is
/// re-certified by complementary slackness before returning.
OtSolution solve_exact_ot(const CostMatrix& cost, const Vector& mu_w, const Vector& nu_w,
                          const ExactOtOptions& opts = {});

/// Repeated exact solves with fixed marginals and changing costs. The optimal
/// basis of the previous solve seeds the next one, which stays primal feasible.
class TransportSimplex {
 public:
  TransportSimplex(Vector mu_w, Vector nu_w, ExactOtOptions opts = {});
  ~TransportSimplex();
  TransportSimplex(TransportSimplex&&) noexcept;
  TransportSimplex& operator=(TransportSimplex&&) noexcept;

  OtSolution solve(const CostMatrix& cost);
  /// Total simplex pivots performed so far.
  std::size_t pivots() const noexcept;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

/// Exact OT between weighted points on the real line under (a - b)^2 via the
/// monotone (quantile) coupling.
OtSolution solve_ot_1d(const Vector& a, const Vector& a_w, const Vector& b, const Vector& b_w);

enum class OtMethod { Exact, Sinkhorn };

/// W_p for p in {1, 2}.
double wasserstein(const DiscreteMeasure& mu, const DiscreteMeasure& nu, int p,
                   OtMethod method = OtMethod::Exact);

struct SinkhornOptions {
  std::size_t max_iters = 200000;
  double tol = 1e-9;  // L1 marginal violation
  /// Warm-start from a geometric schedule of larger regularizations.
  bool epsilon_scaling = true;
};

/// Log-domain Sinkhorn; `reg` is in absolute cost units. The objective is the
/// transport part sum_ij pi_ij c_ij (no entropy term).
OtSolution sinkhorn(const CostMatrix& cost, const Vector& mu_w, const Vector& nu_w, double reg,
                    const SinkhornOptions& opts = {});

/// Closed-form W_2 for measures whose supports lie on one common line.
double quantile_w2_1d(const DiscreteMeasure& mu, const DiscreteMeasure& nu);

/// (eps / 2) * sum_x |mu_w(x) - nu_w(x)| over the atoms of a separated set.
double separated_w1_lower_bound(const SeparatedSet& set, const Vector& mu_w, const Vector& nu_w);

struct GridResult {
  double best_value = 0.0;
  double best_t = 0.0;
  Matrix best_plan;
};

/// Minimize `objective` over the couplings of two uniform 2-atom measures.
/// The polytope is the segment [[t, 1/2 - t], [1/2 - t, t]], t in [0, 1/2],
/// scanned at grid_steps + 1 equispaced values of t.
GridResult brute_coupling_grid(const DiscreteMeasure& mu, const DiscreteMeasure& nu,
                               const std::function<double(const Matrix&)>& objective,
                               std::size_t grid_steps);

}  // namespace srwrate
