#include <doctest.h>

#include <random>

#include "cpscoding/error.hpp"
#include "cpscoding/linalg.hpp"
#include "fixtures.hpp"

using namespace cpscoding;

TEST_CASE("spectral radius of a rotation-scaled matrix") {
  Matrix a(2, 2);
  a << 0.0, -2.0, 2.0, 0.0;
  CHECK(spectral_radius(a) == doctest::Approx(2.0));
}

TEST_CASE("symmetric square roots") {
  std::mt19937_64 rng(3);
  for (int t = 0; t < 20; ++t) {
    const Matrix g = fixtures::gaussian(rng, 4, 4);
    const Matrix m = g * g.transpose() + 0.1 * Matrix::Identity(4, 4);
    const Matrix s = symmetric_sqrt(m);
    CHECK((s * s - m).norm() < 1e-10);
    const Matrix si = symmetric_inv_sqrt(m);
    CHECK((si * m * si - Matrix::Identity(4, 4)).norm() < 1e-9);
  }
  Matrix sing = Matrix::Zero(2, 2);
  sing(0, 0) = 1.0;
  CHECK_THROWS_AS(symmetric_inv_sqrt(sing), Error);
}

TEST_CASE("null space and rank") {
  Matrix m(2, 3);
  m << 1, 2, 3, 2, 4, 6;
  CHECK(numerical_rank(m) == 1);
  const Matrix ns = null_space(m);
  CHECK(ns.cols() == 2);
  CHECK((m * ns).norm() < 1e-12);
  CHECK((ns.transpose() * ns - Matrix::Identity(2, 2)).norm() < 1e-12);
  const Matrix ob = orthonormal_basis(m);
  CHECK(ob.cols() == 1);
}

TEST_CASE("minimum-norm solve matches the pseudo-inverse") {
  std::mt19937_64 rng(5);
  const Matrix m = fixtures::gaussian(rng, 3, 6);
  const Vector b = fixtures::gaussian(rng, 3, 1);
  const Vector x = min_norm_solve(m, b);
  const Matrix pinv = m.transpose() * (m * m.transpose()).inverse();
  CHECK((x - pinv * b).norm() < 1e-10);
}

TEST_CASE("principal cosine") {
  Matrix a(3, 1), b(3, 2);
  a << 1, 0, 0;
  b << 0, 0, 1, 0, 0, 1;
  CHECK(max_principal_cosine(a, b) == doctest::Approx(0.0));
  b(0, 0) = 1;
  b(1, 0) = 0;
  CHECK(max_principal_cosine(a, b) == doctest::Approx(1.0));
  CHECK(max_principal_cosine(a, Matrix(3, 0)) == 0.0);
}

TEST_CASE("matrix power against repeated products") {
  std::mt19937_64 rng(9);
  const Matrix a = fixtures::gaussian(rng, 3, 3, 0.4);
  Matrix acc = Matrix::Identity(3, 3);
  for (int k = 0; k < 12; ++k) {
    CHECK((matrix_power(a, k) - acc).norm() < 1e-12);
    acc = a * acc;
  }
}
