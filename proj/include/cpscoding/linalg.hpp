#pragma once

#include <Eigen/Dense>
#include <vector>

namespace cpscoding {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Series = std::vector<Vector>;

inline constexpr double kDefaultRankTol = 1e-8;

double spectral_radius(const Matrix& a);

// Symmetric square root S with S*S = M for symmetric PSD M; negative
// eigenvalues (round-off) are clamped to zero.
Matrix symmetric_sqrt(const Matrix& m);

// Inverse symmetric square root. Throws SingularQuadraticForm when an
// eigenvalue is not strictly positive.
Matrix symmetric_inv_sqrt(const Matrix& m);

// Orthonormal basis of range(M); singular values below tol * max(1, s_max)
// are dropped.
Matrix orthonormal_basis(const Matrix& m, double tol = kDefaultRankTol);

// Orthonormal basis of the null space of M using the same relative
// threshold. Always contains at least the weakest right-singular vector when
// force_one is set (used when M is known to be singular up to round-off).
Matrix null_space(const Matrix& m, double tol = kDefaultRankTol,
                  bool force_one = false);

int numerical_rank(const Matrix& m, double tol = kDefaultRankTol);

// Minimum-norm least-squares solution of M x = b.
Vector min_norm_solve(const Matrix& m, const Vector& b);

// Largest cosine of a principal angle between range(Qa) and range(Qb); both
// inputs orthonormal. Returns 0 for empty bases.
double max_principal_cosine(const Matrix& qa, const Matrix& qb);

double smallest_singular_value(const Matrix& m);

Matrix matrix_power(const Matrix& a, int k);

double max_norm(const Series& s);

}  // namespace cpscoding
