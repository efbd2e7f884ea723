#pragma once

#include <cstdint>
#include <vector>

#include "cpscoding/linalg.hpp"
#include "cpscoding/lti.hpp"

namespace cpscoding {

// Planar rotation in the (i, j) plane, 0-based indices.
struct GivensRotation {
  int i = 0;
  int j = 1;
  double theta = 0.0;
};

enum class Provenance { Manual, GivensComposed };

class CodingMatrix {
 public:
  // Throws SingularCoding if sigma is not square and well conditioned enough
  // to satisfy |sigma * sigma_inv - I|_F <= 1e-10.
  static CodingMatrix manual(Matrix sigma, int created_at = 0);
  static CodingMatrix composed(std::vector<GivensRotation> rotations, int p,
                               double scale = 1.0, int created_at = 0);

  const Matrix& sigma() const { return sigma_; }
  const Matrix& sigma_inv() const { return sigma_inv_; }
  Provenance provenance() const { return provenance_; }
  const std::vector<GivensRotation>& rotations() const { return rotations_; }
  double scale() const { return scale_; }
  int created_at() const { return created_at_; }
  int p() const { return static_cast<int>(sigma_.rows()); }

  SensorChannel channel() const { return {sigma_, sigma_inv_}; }

 private:
  CodingMatrix() = default;

  Matrix sigma_;
  Matrix sigma_inv_;
  Provenance provenance_ = Provenance::Manual;
  std::vector<GivensRotation> rotations_;
  double scale_ = 1.0;
  int created_at_ = 0;
};

Vector encode(const CodingMatrix& coding, const Vector& y);
Vector decode(const CodingMatrix& coding, const Vector& Y);

inline constexpr double kFeasibilityTol = 1e-9;

// cos(angle(Sigma C v, C v)) < 1 - tol. ZeroVector when C v = 0.
bool check_feasible_single(const Matrix& sigma, const Matrix& C, const Vector& v,
                           double tol = kFeasibilityTol);

// No w != 0 in span{C v_i} with Sigma w = mu w, mu > 0. For each real
// positive eigenvalue of Sigma the largest principal cosine between its
// eigenspace and the span must stay below 1 - tol. ZeroSubspace when every
// C v_i vanishes.
bool check_feasible_multi(const Matrix& sigma, const Matrix& C,
                          const std::vector<Vector>& eigvecs,
                          double tol = kFeasibilityTol);

// 1 is not an eigenvalue of Sigma (within tol).
bool check_feasible_combined(const Matrix& sigma, double tol = kFeasibilityTol);

// G(i,i) = G(j,j) = cos, G(i,j) = -sin, G(j,i) = sin.
Matrix givens_matrix(const GivensRotation& rot, int p);

struct Alg1Options {
  double scale = 1.0;
  double theta_min = 1e-3;     // draws are uniform on [theta_min, pi/2]
  double support_tol = 1e-10;  // coordinate counts as support above this
  int created_at = 0;
};

// Coordinates where an orthonormal basis of span{C v_i} has support.
std::vector<int> coding_support(const Matrix& C, const std::vector<Vector>& eigvecs,
                                double support_tol = 1e-10);

CodingMatrix alg1_coding_matrix(const Matrix& C, const std::vector<Vector>& eigvecs,
                                std::uint64_t seed, const Alg1Options& options = {});
CodingMatrix alg1_coding_matrix(const LinearSystem& sys,
                                const std::vector<Vector>& eigvecs,
                                std::uint64_t seed, const Alg1Options& options = {});

}  // namespace cpscoding
