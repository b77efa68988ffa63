#pragma once

#include <Eigen/Dense>

#include "srwrate/linalg.hpp"
#include "srwrate/measures.hpp"
#include "srwrate/ot.hpp"

namespace srwrate {

/// V_pi = sum_ij pi_ij (x_i - y_j)(x_i - y_j)^T. Throws if the coupling's
/// marginals do not match the measures' weights (tolerance 1e-9).
SymmetricMatrix displacement_second_moment(const DiscreteMeasure& mu, const DiscreteMeasure& nu,
                                           const Coupling& pi);

/// How Frank-Wolfe linearizes pi -> sum_{i<=k} lambda_i(V_pi).
enum class SrwLinearization {
  /// Top-k eigenprojector of V_pi; the linear step is exact OT under the
  /// projected squared cost (a sorted 1-D coupling when k = 1).
  Projector,
  /// Gradient of an entropic smoothing of the top-k eigensum: a "soft"
  /// projector with eigen-weights sigmoid((lambda_i - tau) / beta) summing to
  /// k. The temperature beta is driven to zero by continuation.
  Smoothed,
};

enum class SrwStep {
  /// gamma_t = 2 / (t + 2).
  Standard,
  /// Golden-section search on [0, 1] of the (smoothed) objective.
  LineSearch,
};

enum class SrwMethod {
  /// InteriorPoint for small problems, FrankWolfe otherwise.
  Auto,
  FrankWolfe,
  /// Primal-dual interior point on the epigraph form; dense, meant for
  /// couplings with at most a few thousand entries in low dimension.
  InteriorPoint,
};

struct SrwOptions {
  double tol = 1e-6;
  int max_iters = 5000;
  SrwLinearization linearization = SrwLinearization::Smoothed;
  SrwStep step = SrwStep::LineSearch;
  /// Skip materializing the final coupling (large harness runs).
  bool keep_coupling = true;
  SrwMethod method = SrwMethod::Auto;
};

struct SrwResult {
  /// sqrt of the top-k eigensum at the final coupling (an upper bound on S_k).
  double distance = 0.0;
  int k = 1;
  Coupling coupling;
  /// Upper bound on objective - S_k^2 (objective = distance^2).
  double fw_gap = 0.0;
  /// Best certified lower bound on S_k^2 seen during the run.
  double lower_bound = 0.0;
  int iterations = 0;
  bool converged = false;
  /// D x k orthonormal basis of the maximizing subspace at the final coupling.
  Matrix witness_basis;

  double objective() const noexcept { return distance * distance; }
};

/// S_k(mu, nu) = min over couplings of the top-k eigensum of V_pi, square-rooted.
SrwResult srw_distance(const DiscreteMeasure& mu, const DiscreteMeasure& nu, int k,
                       const SrwOptions& opts = {});

/// srw_distance with k = 1; witness_basis is one unit vector.
SrwResult s1_distance(const DiscreteMeasure& mu, const DiscreteMeasure& nu,
                      const SrwOptions& opts = {});

/// ||(I - P) Sigma (I - P)||_op^{1/2} with Sigma = sum_i w_i x_i x_i^T and P
/// the projector onto span(basis): an upper bound on S_1(mu, P_# mu).
double projection_residual_bound(const DiscreteMeasure& mu, const Matrix& basis);

}  // namespace srwrate
