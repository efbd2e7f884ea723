#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "cpscoding/coding.hpp"
#include "cpscoding/error.hpp"
#include "fixtures.hpp"

using namespace cpscoding;

TEST_CASE("givens matrix hand cases") {
  const Matrix g = givens_matrix({0, 1, std::numbers::pi / 2}, 2);
  Matrix expect(2, 2);
  expect << 0, -1, 1, 0;
  CHECK((g - expect).norm() < 1e-15);
  const Matrix g3 = givens_matrix({2, 0, 0.3}, 3);
  CHECK(g3(1, 1) == 1.0);
  CHECK(g3(2, 2) == doctest::Approx(std::cos(0.3)));
  CHECK(g3(2, 0) == doctest::Approx(-std::sin(0.3)));
  CHECK(g3(0, 2) == doctest::Approx(std::sin(0.3)));
  CHECK((g3.transpose() * g3 - Matrix::Identity(3, 3)).norm() < 1e-15);
  CHECK(g3.determinant() == doctest::Approx(1.0));
  CHECK_THROWS_AS(givens_matrix({1, 1, 0.2}, 3), Error);
  CHECK_THROWS_AS(givens_matrix({0, 3, 0.2}, 3), Error);
}

TEST_CASE("coding matrices round trip") {
  std::mt19937_64 rng(1);
  for (int t = 0; t < 50; ++t) {
    const Matrix s = fixtures::gaussian(rng, 3, 3) + 3.0 * Matrix::Identity(3, 3);
    const auto cm = CodingMatrix::manual(s, t);
    const Vector y = fixtures::gaussian(rng, 3, 1);
    CHECK((decode(cm, encode(cm, y)) - y).norm() < 1e-12);
    CHECK(cm.created_at() == t);
  }
  try {
    CodingMatrix::manual(Matrix::Zero(2, 2));
    FAIL("expected SingularCoding");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::SingularCoding);
  }
  CHECK_THROWS_AS(CodingMatrix::manual(Matrix::Identity(2, 3)), Error);
}

TEST_CASE("composed coding is the scaled product of its rotations") {
  const std::vector<GivensRotation> rots = {{0, 1, 0.4}, {2, 1, 1.1}};
  const auto cm = CodingMatrix::composed(rots, 3, 2.5);
  const Matrix expect = 2.5 * givens_matrix(rots[0], 3) * givens_matrix(rots[1], 3);
  CHECK((cm.sigma() - expect).norm() < 1e-14);
  CHECK(cm.provenance() == Provenance::GivensComposed);
  CHECK((cm.sigma() * cm.sigma_inv() - Matrix::Identity(3, 3)).norm() < 1e-12);
}

TEST_CASE("single-direction feasibility on the reference plant") {
  const auto s = fixtures::plant();
  const Vector v = unstable_eigenpairs(s)[0].real_vector();
  CHECK(check_feasible_single(fixtures::sigma1(), s.C, v));
  CHECK(check_feasible_single(fixtures::sigma2(), s.C, v));
  CHECK(check_feasible_single(fixtures::rotation(), s.C, v));
  CHECK_FALSE(check_feasible_single(Matrix::Identity(2, 2), s.C, v));
  CHECK_FALSE(check_feasible_single(2.0 * Matrix::Identity(2, 2), s.C, v));
  // negative multiples flip the direction, which is not a stealthy image
  CHECK(check_feasible_single(-Matrix::Identity(2, 2), s.C, v));
  try {
    check_feasible_single(Matrix::Identity(2, 2), Matrix::Zero(2, 2), v);
    FAIL("expected ZeroVector");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::ZeroVector);
  }
}

TEST_CASE("single and multi checks agree on one direction") {
  std::mt19937_64 rng(2024);
  std::uniform_int_distribution<int> dim(2, 5);
  std::uniform_real_distribution<double> mu(0.2, 3.0);
  int infeasible = 0;
  for (int t = 0; t < 1000; ++t) {
    const int p = dim(rng), n = dim(rng);
    const Matrix C = fixtures::gaussian(rng, p, n);
    const Vector v = fixtures::gaussian(rng, n, 1);
    Matrix sigma;
    if (t % 2 == 0) {
      sigma = fixtures::gaussian(rng, p, p);
    } else {
      // plant C v as an eigenvector with a positive eigenvalue
      Matrix V = fixtures::gaussian(rng, p, p);
      V.col(0) = C * v;
      Vector d(p);
      for (int i = 0; i < p; ++i) d(i) = mu(rng);
      sigma = V * d.asDiagonal() * V.inverse();
    }
    const bool single = check_feasible_single(sigma, C, v);
    const bool multi = check_feasible_multi(sigma, C, {v});
    CHECK(single == multi);
    if (t % 2 == 1) CHECK_FALSE(multi);
    infeasible += !multi;
  }
  CHECK(infeasible >= 500);
}

TEST_CASE("combined feasibility") {
  CHECK(check_feasible_combined(fixtures::rotation()));
  CHECK(check_feasible_combined(fixtures::sigma2()));
  CHECK_FALSE(check_feasible_combined(Matrix::Identity(2, 2)));
  Matrix d = Matrix::Identity(2, 2);
  d(1, 1) = 2.0;
  CHECK_FALSE(check_feasible_combined(d));
}

TEST_CASE("givens coding generator on the reference plant") {
  const auto s = fixtures::plant();
  std::vector<Vector> vs = {unstable_eigenpairs(s)[0].real_vector()};
  const auto support = coding_support(s.C, vs);
  CHECK(support == std::vector<int>{0, 1});
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const auto a = alg1_coding_matrix(s, vs, seed);
    const auto b = alg1_coding_matrix(s, vs, seed);
    CHECK(a.sigma() == b.sigma());
    CHECK(check_feasible_multi(a.sigma(), s.C, vs));
    CHECK((a.sigma().transpose() * a.sigma() - Matrix::Identity(2, 2)).norm() < 1e-12);
    for (const auto& r : a.rotations()) {
      CHECK(r.theta >= 1e-3);
      CHECK(r.theta <= std::numbers::pi / 2);
    }
  }
  Alg1Options o;
  o.scale = 3.0;
  const auto sc = alg1_coding_matrix(s, vs, 1, o);
  CHECK((sc.sigma().transpose() * sc.sigma() - 9.0 * Matrix::Identity(2, 2)).norm() < 1e-11);
}

TEST_CASE("givens generator rotation count follows the support") {
  Matrix C = Matrix::Identity(5, 5);
  std::vector<Vector> vs = {Vector::Unit(5, 0) + Vector::Unit(5, 2) + Vector::Unit(5, 3)};
  CHECK(coding_support(C, vs) == std::vector<int>{0, 2, 3});
  // three coordinates: one pairwise draw, then one draw for the remaining one
  const auto cm = alg1_coding_matrix(C, vs, 5);
  CHECK(cm.rotations().size() == 2);
  Matrix c1(1, 1);
  c1 << 1.0;
  try {
    alg1_coding_matrix(c1, {Vector::Ones(1)}, 0);
    FAIL("expected DimensionTooSmall");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::DimensionTooSmall);
  }
}
