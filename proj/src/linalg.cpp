#include "srwrate/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "srwrate/errors.hpp"
#include "srwrate/io.hpp"

namespace srwrate {

SymmetricMatrix::SymmetricMatrix(const Matrix& a) {
  if (a.rows() != a.cols()) throw InvalidArgument("symmetric matrix must be square");
  if (!a.allFinite()) throw NumericalError("symmetric matrix has NaN or Inf entries");
  if (a.size() > 0) {
    const double asym = (a - a.transpose()).cwiseAbs().maxCoeff();
    const double scale = std::max(1.0, a.cwiseAbs().maxCoeff());
    if (asym > 1e-12 * scale) {
      throw InvalidArgument("matrix is not symmetric (max asymmetry " + format_double(asym) + ")");
    }
  }
  a_ = 0.5 * (a + a.transpose());
}

void SymmetricMatrix::check_psd(double tol) const {
  const auto eig = jacobi_eigen(*this);
  const double lo = eig.eigenvalues[eig.eigenvalues.size() - 1];
  if (lo < -tol) throw NumericalError("matrix is not PSD (min eigenvalue " + format_double(lo) + ")");
}

Matrix SpectralDecomposition::reconstruct() const {
  return eigenvectors * eigenvalues.asDiagonal() * eigenvectors.transpose();
}

SpectralDecomposition jacobi_eigen(const SymmetricMatrix& sym, const JacobiOptions& opts,
                                   const Matrix* warm_basis) {
  const Eigen::Index n = sym.dim();
  Matrix a = sym.matrix();
  Matrix v = Matrix::Identity(n, n);
  if (warm_basis != nullptr) {
    if (warm_basis->rows() != n || warm_basis->cols() != n) {
      throw InvalidArgument("warm basis has the wrong shape");
    }
    v = *warm_basis;
    a = v.transpose() * a * v;
    a = (0.5 * (a + a.transpose())).eval();
  }

  const double norm = sym.matrix().norm();
  auto off_norm = [&]() {
    double s = 0.0;
    for (Eigen::Index q = 1; q < n; ++q) {
      for (Eigen::Index p = 0; p < q; ++p) s += 2.0 * a(p, q) * a(p, q);
    }
    return std::sqrt(s);
  };

  for (int sweep = 0; sweep < opts.max_sweeps && n > 1; ++sweep) {
    if (off_norm() <= opts.tol * norm) break;
    for (Eigen::Index p = 0; p < n - 1; ++p) {
      for (Eigen::Index q = p + 1; q < n; ++q) {
        const double apq = a(p, q);
        if (apq == 0.0) continue;
        // Rutishauser's stable rotation.
        const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
        const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                         (std::abs(theta) + std::sqrt(1.0 + theta * theta));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = t * c;
        const double tau = s / (1.0 + c);
        const double app = a(p, p), aqq = a(q, q);
        a(p, p) = app - t * apq;
        a(q, q) = aqq + t * apq;
        a(p, q) = a(q, p) = 0.0;
        for (Eigen::Index r = 0; r < n; ++r) {
          if (r == p || r == q) continue;
          const double arp = a(r, p), arq = a(r, q);
          a(r, p) = a(p, r) = arp - s * (arq + tau * arp);
          a(r, q) = a(q, r) = arq + s * (arp - tau * arq);
        }
        for (Eigen::Index r = 0; r < n; ++r) {
          const double vrp = v(r, p), vrq = v(r, q);
          v(r, p) = vrp - s * (vrq + tau * vrp);
          v(r, q) = vrq + s * (vrp - tau * vrq);
        }
      }
    }
  }
  if (n > 1 && !(off_norm() <= std::max(opts.tol * norm, 1e-300) * 1e3)) {
    throw NumericalError("Jacobi eigendecomposition did not converge");
  }

  // Sign convention: first entry with |x| > 1e-14 positive.
  for (Eigen::Index j = 0; j < n; ++j) {
    for (Eigen::Index r = 0; r < n; ++r) {
      if (std::abs(v(r, j)) > 1e-14) {
        if (v(r, j) < 0.0) v.col(j) = -v.col(j);
        break;
      }
    }
  }

  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::sort(order.begin(), order.end(), [&](Eigen::Index x, Eigen::Index y) {
    if (a(x, x) != a(y, y)) return a(x, x) > a(y, y);
    for (Eigen::Index r = 0; r < n; ++r) {
      if (v(r, x) != v(r, y)) return v(r, x) > v(r, y);
    }
    return x < y;
  });

  SpectralDecomposition out;
  out.eigenvalues.resize(n);
  out.eigenvectors.resize(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    out.eigenvalues[j] = a(order[j], order[j]);
    out.eigenvectors.col(j) = v.col(order[j]);
  }
  return out;
}

TopK topk_eigensum(const SpectralDecomposition& eig, int k) {
  const auto n = eig.eigenvalues.size();
  if (k < 1 || k > n) {
    throw InvalidArgument("k = " + std::to_string(k) + " outside [1, " + std::to_string(n) + "]");
  }
  TopK out;
  out.value = eig.eigenvalues.head(k).sum();
  out.basis = eig.eigenvectors.leftCols(k);
  return out;
}

TopK topk_eigensum(const SymmetricMatrix& a, int k) {
  if (k < 1 || k > a.dim()) {
    throw InvalidArgument("k = " + std::to_string(k) + " outside [1, " + std::to_string(a.dim()) +
                          "]");
  }
  return topk_eigensum(jacobi_eigen(a), k);
}

double max_eigenvalue(const SymmetricMatrix& a) { return jacobi_eigen(a).eigenvalues[0]; }

}  // namespace srwrate
