#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <string_view>

#include <Eigen/Dense>

#include "srwrate/rng.hpp"

namespace srwrate {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

inline constexpr double kWeightSumTol = 1e-12;
inline constexpr double kBallTol = 1e-12;
inline constexpr double kOrthonormalTol = 1e-10;

/// Finitely supported probability measure on the closed unit ball of R^D.
/// Atoms are the rows of `points()`; duplicates are allowed and never merged.
/// The constructor enforces the invariants, so every live instance is valid.
class DiscreteMeasure {
 public:
  DiscreteMeasure(Matrix points, Vector weights);

  /// Equal weights 1/n on the rows of `points`.
  static DiscreteMeasure uniform(Matrix points);

  Eigen::Index dim() const noexcept { return points_.cols(); }
  Eigen::Index size() const noexcept { return points_.rows(); }
  const Matrix& points() const noexcept { return points_; }
  const Vector& weights() const noexcept { return weights_; }

  /// Exact second moment sum_i w_i x_i x_i^T.
  Matrix second_moment() const;

 private:
  Matrix points_;
  Vector weights_;
};

/// Throws InvalidArgument unless weights/points satisfy the measure invariants.
void validate_measure(const Matrix& points, const Vector& weights);

/// Point set whose pairwise distances all exceed `epsilon`.
struct SeparatedSet {
  int dim = 0;
  double epsilon = 0.0;
  Matrix points;  // rows

  /// Smallest pairwise distance (+inf for fewer than two points).
  double min_pairwise_distance() const;
  /// Throws NumericalError if separation or unit-ball membership fails.
  void certify() const;
};

enum class SamplerKind { UniformSphere, UniformBall, WorstCasePacking, Finite };

/// A seeded law on the unit ball. Copies share the (immutable) finite support.
class Sampler {
 public:
  static Sampler uniform_sphere(int dim, std::uint64_t seed);
  static Sampler uniform_ball(int dim, std::uint64_t seed);
  /// Uniform law on worst_case_measure(n, construction_seed).
  static Sampler packing(std::size_t n, std::uint64_t construction_seed, std::uint64_t seed);
  static Sampler finite(DiscreteMeasure truth, std::uint64_t seed, std::string label = "finite");

  /// Parse `uniform-sphere:d=40`, `uniform-ball:d=5`, `packing:n=100[,seed=S]`
  /// or `file:path.json`. Packing construction seeds default to a value
  /// derived from `seed`.
  static Sampler parse(std::string_view spec, std::uint64_t seed);

  Sampler with_seed(std::uint64_t seed) const;

  SamplerKind kind() const noexcept { return kind_; }
  int dim() const noexcept { return dim_; }
  std::uint64_t seed() const noexcept { return seed_; }
  const std::string& spec() const noexcept { return spec_; }
  /// The finite law itself for packing/finite samplers, nullptr otherwise.
  const DiscreteMeasure* truth() const noexcept { return truth_.get(); }

  /// Draw one point into `out` (length dim()).
  void draw(CounterRng& rng, Eigen::Ref<Vector> out) const;

 private:
  Sampler(SamplerKind kind, int dim, std::uint64_t seed, std::string spec);

  SamplerKind kind_;
  int dim_;
  std::uint64_t seed_;
  std::string spec_;
  std::shared_ptr<const DiscreteMeasure> truth_;
  std::shared_ptr<const Vector> cumulative_;
};

/// Empirical measure of n i.i.d. draws from `sampler` (stream keyed by sampler.seed()).
DiscreteMeasure sample_empirical(const Sampler& sampler, std::size_t n);

/// Greedy rejection construction of `target` points in the unit ball that are
/// pairwise strictly more than `epsilon` apart. Throws PackingNotFound once
/// `max_attempts` draws have been rejected.
SeparatedSet greedy_separated_set(int dim, double epsilon, std::size_t target, std::uint64_t seed,
                                  std::size_t max_attempts = 1'000'000);

/// ceil(ln n): the ambient dimension of the worst-case construction.
int worst_case_dimension(std::size_t n);

/// The 1/3-separated support used by worst_case_measure.
SeparatedSet worst_case_support(std::size_t n, std::uint64_t seed);

/// Uniform measure on n points of the unit ball of R^{ceil(ln n)}, pairwise > 1/3 apart.
DiscreteMeasure worst_case_measure(std::size_t n, std::uint64_t seed);

/// Haar-distributed orthogonal matrix from a seeded Gaussian QR.
Matrix random_orthogonal(int dim, std::uint64_t seed);

/// Zero-pad to `target_dim`, then rotate by random_orthogonal(target_dim, seed).
/// Without a seed only the padding is applied.
DiscreteMeasure isometric_embed(const DiscreteMeasure& mu, int target_dim,
                                std::optional<std::uint64_t> orthogonal_seed);

/// Throws InvalidArgument unless the columns of `basis` are orthonormal.
void check_orthonormal(const Matrix& basis, double tol = kOrthonormalTol);

/// Pushforward under the orthogonal projection onto span(basis columns),
/// expressed in ambient coordinates.
DiscreteMeasure project_measure(const DiscreteMeasure& mu, const Matrix& basis);

}  // namespace srwrate
