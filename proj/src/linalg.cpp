#include "cpscoding/linalg.hpp"

#include <algorithm>
#include <cmath>

#include "cpscoding/error.hpp"

namespace cpscoding {

double spectral_radius(const Matrix& a) {
  if (a.size() == 0) return 0.0;
  Eigen::EigenSolver<Matrix> es(a, /*computeEigenvectors=*/false);
  if (es.info() != Eigen::Success) {
    fail(ErrorKind::EigensolverFailure, "spectral radius: eigensolver failed");
  }
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

Matrix symmetric_sqrt(const Matrix& m) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (m + m.transpose()));
  Vector d = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return es.eigenvectors() * d.asDiagonal() * es.eigenvectors().transpose();
}

Matrix symmetric_inv_sqrt(const Matrix& m) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (m + m.transpose()));
  const Vector& ev = es.eigenvalues();
  if (ev.minCoeff() <= 0.0) {
    fail(ErrorKind::SingularQuadraticForm,
         "matrix is not positive definite (min eigenvalue " +
             std::to_string(ev.minCoeff()) + ")");
  }
  Vector d = ev.cwiseSqrt().cwiseInverse();
  return es.eigenvectors() * d.asDiagonal() * es.eigenvectors().transpose();
}

namespace {

double threshold(const Eigen::JacobiSVD<Matrix>& svd, double tol) {
  const auto& s = svd.singularValues();
  const double smax = s.size() > 0 ? s(0) : 0.0;
  return tol * std::max(1.0, smax);
}

}  // namespace

Matrix orthonormal_basis(const Matrix& m, double tol) {
  if (m.cols() == 0) return Matrix(m.rows(), 0);
  Eigen::JacobiSVD<Matrix> svd(m, Eigen::ComputeFullU);
  const double thr = threshold(svd, tol);
  int r = 0;
  for (Eigen::Index i = 0; i < svd.singularValues().size(); ++i) {
    if (svd.singularValues()(i) > thr) ++r;
  }
  return svd.matrixU().leftCols(r);
}

Matrix null_space(const Matrix& m, double tol, bool force_one) {
  const Eigen::Index n = m.cols();
  Eigen::JacobiSVD<Matrix> svd(m, Eigen::ComputeFullV);
  const double thr = threshold(svd, tol);
  const auto& s = svd.singularValues();
  int r = 0;
  for (Eigen::Index i = 0; i < s.size(); ++i) {
    if (s(i) > thr) ++r;
  }
  // Singular values beyond min(rows, cols) are implicitly zero.
  int nullity = static_cast<int>(n) - r;
  if (force_one && nullity == 0 && n > 0) nullity = 1;
  return svd.matrixV().rightCols(nullity);
}

int numerical_rank(const Matrix& m, double tol) {
  if (m.size() == 0) return 0;
  Eigen::JacobiSVD<Matrix> svd(m);
  const double thr = threshold(svd, tol);
  int r = 0;
  for (Eigen::Index i = 0; i < svd.singularValues().size(); ++i) {
    if (svd.singularValues()(i) > thr) ++r;
  }
  return r;
}

Vector min_norm_solve(const Matrix& m, const Vector& b) {
  Eigen::CompleteOrthogonalDecomposition<Matrix> cod(m);
  cod.setThreshold(1e-12);
  return cod.solve(b);
}

double max_principal_cosine(const Matrix& qa, const Matrix& qb) {
  if (qa.cols() == 0 || qb.cols() == 0) return 0.0;
  Eigen::JacobiSVD<Matrix> svd(qa.transpose() * qb);
  return svd.singularValues()(0);
}

double smallest_singular_value(const Matrix& m) {
  Eigen::JacobiSVD<Matrix> svd(m);
  const auto& s = svd.singularValues();
  return s.size() > 0 ? s(s.size() - 1) : 0.0;
}

Matrix matrix_power(const Matrix& a, int k) {
  Matrix result = Matrix::Identity(a.rows(), a.cols());
  for (int i = 0; i < k; ++i) result = a * result;
  return result;
}

double max_norm(const Series& s) {
  double best = 0.0;
  for (const auto& v : s) best = std::max(best, v.norm());
  return best;
}

}  // namespace cpscoding
