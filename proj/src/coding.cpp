#include "cpscoding/coding.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <string>

#include "cpscoding/error.hpp"

namespace cpscoding {

namespace {

Matrix checked_inverse(const Matrix& sigma) {
  if (sigma.rows() != sigma.cols() || sigma.rows() < 1) {
    fail(ErrorKind::SingularCoding, "coding matrix must be square");
  }
  Eigen::FullPivLU<Matrix> lu(sigma);
  if (!lu.isInvertible()) fail(ErrorKind::SingularCoding, "coding matrix is singular");
  Matrix inv = lu.inverse();
  const auto p = sigma.rows();
  if (!inv.allFinite() ||
      (sigma * inv - Matrix::Identity(p, p)).norm() > 1e-10) {
    fail(ErrorKind::SingularCoding, "coding matrix is numerically singular");
  }
  return inv;
}

Matrix image_basis(const Matrix& C, const std::vector<Vector>& eigvecs) {
  Matrix W(C.rows(), static_cast<Eigen::Index>(eigvecs.size()));
  for (std::size_t i = 0; i < eigvecs.size(); ++i) {
    if (eigvecs[i].size() != C.cols()) {
      fail(ErrorKind::DimensionMismatch, "eigenvector length does not match C");
    }
    W.col(static_cast<Eigen::Index>(i)) = C * eigvecs[i];
  }
  Matrix q = orthonormal_basis(W, 1e-10);
  if (q.cols() == 0) fail(ErrorKind::ZeroSubspace, "every C v_i is zero");
  return q;
}

}  // namespace

CodingMatrix CodingMatrix::manual(Matrix sigma, int created_at) {
  CodingMatrix c;
  c.sigma_inv_ = checked_inverse(sigma);
  c.sigma_ = std::move(sigma);
  c.provenance_ = Provenance::Manual;
  c.created_at_ = created_at;
  return c;
}

CodingMatrix CodingMatrix::composed(std::vector<GivensRotation> rotations, int p,
                                    double scale, int created_at) {
  if (!(scale > 0.0) || !std::isfinite(scale)) {
    fail(ErrorKind::InvalidArgument, "coding scale must be positive");
  }
  Matrix sigma = Matrix::Identity(p, p);
  for (const auto& r : rotations) sigma = sigma * givens_matrix(r, p);
  sigma *= scale;
  CodingMatrix c;
  c.sigma_inv_ = checked_inverse(sigma);
  c.sigma_ = std::move(sigma);
  c.provenance_ = Provenance::GivensComposed;
  c.rotations_ = std::move(rotations);
  c.scale_ = scale;
  c.created_at_ = created_at;
  return c;
}

Vector encode(const CodingMatrix& coding, const Vector& y) {
  if (y.size() != coding.p()) fail(ErrorKind::DimensionMismatch, "encode: wrong size");
  return coding.sigma() * y;
}

Vector decode(const CodingMatrix& coding, const Vector& Y) {
  if (Y.size() != coding.p()) fail(ErrorKind::DimensionMismatch, "decode: wrong size");
  return coding.sigma_inv() * Y;
}

bool check_feasible_single(const Matrix& sigma, const Matrix& C, const Vector& v,
                           double tol) {
  if (sigma.rows() != C.rows() || sigma.cols() != C.rows() || v.size() != C.cols()) {
    fail(ErrorKind::DimensionMismatch, "check_feasible_single: shapes disagree");
  }
  const Vector cv = C * v;
  const double ncv = cv.norm();
  if (ncv <= 1e-14 * std::max(1.0, v.norm())) {
    fail(ErrorKind::ZeroVector, "C v is zero");
  }
  const Vector scv = sigma * cv;
  const double nscv = scv.norm();
  if (nscv == 0.0) fail(ErrorKind::SingularCoding, "Sigma C v is zero");
  const double cosine = cv.dot(scv) / (ncv * nscv);
  return cosine < 1.0 - tol;
}

bool check_feasible_multi(const Matrix& sigma, const Matrix& C,
                          const std::vector<Vector>& eigvecs, double tol) {
  const auto p = C.rows();
  if (sigma.rows() != p || sigma.cols() != p) {
    fail(ErrorKind::DimensionMismatch, "check_feasible_multi: Sigma must be p x p");
  }
  if (eigvecs.empty()) fail(ErrorKind::ZeroSubspace, "no eigenvectors given");
  const Matrix qw = image_basis(C, eigvecs);

  Eigen::EigenSolver<Matrix> es(sigma, false);
  if (es.info() != Eigen::Success) {
    fail(ErrorKind::EigensolverFailure, "check_feasible_multi: eigensolver failed");
  }
  const double smax = std::max(1.0, sigma.cwiseAbs().maxCoeff());
  std::vector<double> done;
  for (Eigen::Index i = 0; i < p; ++i) {
    const std::complex<double> mu = es.eigenvalues()(i);
    if (std::abs(mu.imag()) > 1e-9 * smax || mu.real() <= 0.0) continue;
    const double m = mu.real();
    if (std::any_of(done.begin(), done.end(),
                    [&](double d) { return std::abs(d - m) <= 1e-8 * smax; })) {
      continue;
    }
    done.push_back(m);
    const Matrix eig = null_space(sigma - m * Matrix::Identity(p, p), 1e-9, true);
    if (max_principal_cosine(qw, eig) >= 1.0 - tol) return false;
  }
  return true;
}

bool check_feasible_combined(const Matrix& sigma, double tol) {
  Eigen::EigenSolver<Matrix> es(sigma, false);
  if (es.info() != Eigen::Success) {
    fail(ErrorKind::EigensolverFailure, "check_feasible_combined: eigensolver failed");
  }
  for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) {
    if (std::abs(es.eigenvalues()(i) - 1.0) <= tol) return false;
  }
  return true;
}

Matrix givens_matrix(const GivensRotation& rot, int p) {
  if (p < 2 || rot.i < 0 || rot.j < 0 || rot.i >= p || rot.j >= p || rot.i == rot.j) {
    fail(ErrorKind::IndexOutOfRange,
         "Givens plane (" + std::to_string(rot.i) + ", " + std::to_string(rot.j) +
             ") invalid for p = " + std::to_string(p));
  }
  Matrix g = Matrix::Identity(p, p);
  const double c = std::cos(rot.theta), s = std::sin(rot.theta);
  g(rot.i, rot.i) = c;
  g(rot.j, rot.j) = c;
  g(rot.i, rot.j) = -s;
  g(rot.j, rot.i) = s;
  return g;
}

std::vector<int> coding_support(const Matrix& C, const std::vector<Vector>& eigvecs,
                                double support_tol) {
  if (eigvecs.empty()) fail(ErrorKind::ZeroSubspace, "no eigenvectors given");
  const Matrix q = image_basis(C, eigvecs);
  std::vector<int> support;
  for (Eigen::Index r = 0; r < q.rows(); ++r) {
    if (q.row(r).cwiseAbs().maxCoeff() > support_tol) support.push_back(static_cast<int>(r));
  }
  return support;
}

CodingMatrix alg1_coding_matrix(const Matrix& C, const std::vector<Vector>& eigvecs,
                                std::uint64_t seed, const Alg1Options& opt) {
  const int p = static_cast<int>(C.rows());
  if (p < 2) fail(ErrorKind::DimensionTooSmall, "a Givens coding needs p >= 2");
  std::vector<int> S = coding_support(C, eigvecs, opt.support_tol);

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> angle(opt.theta_min, std::numbers::pi / 2);
  auto pick = [&](int size) {
    return std::uniform_int_distribution<int>(0, size - 1)(rng);
  };

  std::vector<GivensRotation> rotations;
  while (!S.empty()) {
    GivensRotation rot;
    rot.theta = angle(rng);
    if (S.size() > 2) {
      const int a = pick(static_cast<int>(S.size()));
      rot.i = S[static_cast<std::size_t>(a)];
      S.erase(S.begin() + a);
      const int b = pick(static_cast<int>(S.size()));
      rot.j = S[static_cast<std::size_t>(b)];
      S.erase(S.begin() + b);
    } else {
      const int a = pick(static_cast<int>(S.size()));
      rot.i = S[static_cast<std::size_t>(a)];
      S.erase(S.begin() + a);
      const int b = pick(p - 1);
      rot.j = b < rot.i ? b : b + 1;
    }
    rotations.push_back(rot);
  }
  return CodingMatrix::composed(std::move(rotations), p, opt.scale, opt.created_at);
}

CodingMatrix alg1_coding_matrix(const LinearSystem& sys,
                                const std::vector<Vector>& eigvecs,
                                std::uint64_t seed, const Alg1Options& options) {
  return alg1_coding_matrix(sys.C, eigvecs, seed, options);
}

}  // namespace cpscoding
