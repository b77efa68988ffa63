#include <algorithm>

#include <doctest.h>

#include "srwrate/errors.hpp"
#include "srwrate/linalg.hpp"

using namespace srwrate;

namespace {

Matrix random_psd(int d, std::uint64_t seed) {
  CounterRng rng(seed);
  Matrix g(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) g(i, j) = rng.normal();
  return g * g.transpose();
}

}  // namespace

TEST_CASE("symmetric matrix validation") {
  Matrix a(2, 2);
  a << 1, 2, 2.1, 1;
  CHECK_THROWS_AS(SymmetricMatrix{a}, InvalidArgument);
  Matrix b(2, 2);
  b << 1, 2, 2, 1;
  const SymmetricMatrix s(b);
  CHECK_THROWS_AS(s.check_psd(), NumericalError);
  CHECK_NOTHROW(SymmetricMatrix(random_psd(4, 1)).check_psd());
}

TEST_CASE("jacobi agrees with Eigen's solver") {
  for (std::uint64_t seed : {1, 2, 3}) {
    const Matrix a = random_psd(7, seed);
    const auto eig = jacobi_eigen(SymmetricMatrix(a));
    Eigen::SelfAdjointEigenSolver<Matrix> ref(a);
    Vector expected = ref.eigenvalues().reverse();
    CHECK((eig.eigenvalues - expected).cwiseAbs().maxCoeff() < 1e-10 * a.cwiseAbs().maxCoeff());
    CHECK((eig.reconstruct() - a).cwiseAbs().maxCoeff() <= 1e-8 * a.cwiseAbs().maxCoeff());
    const Matrix q = eig.eigenvectors;
    CHECK((q.transpose() * q - Matrix::Identity(7, 7)).cwiseAbs().maxCoeff() <= 1e-10);
    for (Eigen::Index i = 1; i < 7; ++i) CHECK(eig.eigenvalues(i - 1) >= eig.eigenvalues(i));
  }
}

TEST_CASE("jacobi warm start converges to the same spectrum") {
  const Matrix a = random_psd(6, 9);
  const auto cold = jacobi_eigen(SymmetricMatrix(a));
  Matrix perturbed = a;
  perturbed(0, 1) += 1e-3;
  perturbed(1, 0) += 1e-3;
  const auto warm = jacobi_eigen(SymmetricMatrix(perturbed), {}, &cold.eigenvectors);
  const auto fresh = jacobi_eigen(SymmetricMatrix(perturbed));
  CHECK((warm.eigenvalues - fresh.eigenvalues).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("topk_eigensum") {
  SUBCASE("diag(3, 1), k = 1") {
    Matrix a = Eigen::Vector2d(3, 1).asDiagonal();
    const auto t = topk_eigensum(SymmetricMatrix(a), 1);
    CHECK(t.value == doctest::Approx(3.0));
    CHECK(std::abs(t.basis(0, 0)) == doctest::Approx(1.0));
  }
  SUBCASE("identity, k = 2") {
    const auto t = topk_eigensum(SymmetricMatrix(Matrix::Identity(3, 3)), 2);
    CHECK(t.value == doctest::Approx(2.0));
    CHECK((t.basis.transpose() * t.basis - Matrix::Identity(2, 2)).cwiseAbs().maxCoeff() < 1e-12);
  }
  SUBCASE("random 6x6 against the full spectrum") {
    const Matrix a = random_psd(6, 4);
    Eigen::SelfAdjointEigenSolver<Matrix> ref(a);
    for (int k = 1; k <= 6; ++k) {
      double expected = 0.0;
      for (int i = 0; i < k; ++i) expected += ref.eigenvalues()(5 - i);
      const auto t = topk_eigensum(SymmetricMatrix(a), k);
      CHECK(std::abs(t.value - expected) <= 1e-10 * std::max(1.0, expected));
      // <P_E, A> over the returned basis reproduces the sum.
      CHECK((t.basis.transpose() * a * t.basis).trace() == doctest::Approx(expected).epsilon(1e-10));
    }
    CHECK(max_eigenvalue(SymmetricMatrix(a)) == doctest::Approx(ref.eigenvalues()(5)));
  }
  CHECK_THROWS_AS(topk_eigensum(SymmetricMatrix(Matrix::Identity(3, 3)), 0), InvalidArgument);
  CHECK_THROWS_AS(topk_eigensum(SymmetricMatrix(Matrix::Identity(3, 3)), 4), InvalidArgument);
}
