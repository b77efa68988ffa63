#pragma once

#include <optional>

#include <Eigen/Dense>

#include "srwrate/measures.hpp"

namespace srwrate {

/// Dense symmetric matrix. Construction checks symmetry to 1e-12 (max-abs)
/// and stores the exactly symmetrized average.
class SymmetricMatrix {
 public:
  explicit SymmetricMatrix(const Matrix& a);
  static SymmetricMatrix zero(Eigen::Index dim) { return SymmetricMatrix(Matrix::Zero(dim, dim)); }

  Eigen::Index dim() const noexcept { return a_.rows(); }
  const Matrix& matrix() const noexcept { return a_; }
  double operator()(Eigen::Index i, Eigen::Index j) const { return a_(i, j); }

  /// Throws NumericalError if the smallest eigenvalue is below -tol.
  void check_psd(double tol = 1e-10) const;

 private:
  Matrix a_;
};

/// Eigenvalues in descending order with orthonormal eigenvector columns.
/// Ordering ties are broken lexicographically on the eigenvectors, whose
/// first nonzero entry is made positive.
struct SpectralDecomposition {
  Vector eigenvalues;
  Matrix eigenvectors;

  Matrix reconstruct() const;
};

struct JacobiOptions {
  /// Stop once the off-diagonal Frobenius norm is below tol * ||A||_F.
  double tol = 1e-12;
  int max_sweeps = 64;
};

/// Cyclic Jacobi eigendecomposition. `warm_basis`, when given, must be
/// orthogonal; the iteration then starts from Q^T A Q, which converges in a
/// sweep or two when Q is an eigenbasis of a nearby matrix.
SpectralDecomposition jacobi_eigen(const SymmetricMatrix& a, const JacobiOptions& opts = {},
                                   const Matrix* warm_basis = nullptr);

struct TopK {
  double value = 0.0;
  Matrix basis;  // D x k orthonormal columns spanning a top-k invariant subspace
};

/// lambda_1 + ... + lambda_k with the corresponding eigenvectors.
TopK topk_eigensum(const SymmetricMatrix& a, int k);
TopK topk_eigensum(const SpectralDecomposition& eig, int k);

/// Largest eigenvalue of a symmetric matrix (operator norm when PSD).
double max_eigenvalue(const SymmetricMatrix& a);

}  // namespace srwrate
