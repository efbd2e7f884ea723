#include "cpscoding/lti.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

#include "cpscoding/error.hpp"

namespace cpscoding {

namespace {

std::string shape(const Matrix& m) {
  return std::to_string(m.rows()) + "x" + std::to_string(m.cols());
}

void require_symmetric(const Matrix& m, const char* name, double tol) {
  const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
  if ((m - m.transpose()).cwiseAbs().maxCoeff() > tol * scale) {
    fail(ErrorKind::CovarianceNotPSD, std::string(name) + " is not symmetric");
  }
}

double min_eigenvalue(const Matrix& m) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (m + m.transpose()),
                                           Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

Matrix noise_factor(const Matrix& cov) {
  Eigen::LLT<Matrix> llt(cov);
  if (llt.info() == Eigen::Success) return llt.matrixL();
  return symmetric_sqrt(cov);
}

}  // namespace

LinearSystem make_system(Matrix A, Matrix B, Matrix C, Matrix Q, Matrix R,
                         double tol) {
  const auto n = A.rows();
  if (n < 1 || A.cols() != n) {
    fail(ErrorKind::DimensionMismatch, "A must be square, got " + shape(A));
  }
  if (B.rows() != n || B.cols() < 1) {
    fail(ErrorKind::DimensionMismatch,
         "B must have " + std::to_string(n) + " rows, got " + shape(B));
  }
  if (C.cols() != n || C.rows() < 1) {
    fail(ErrorKind::DimensionMismatch,
         "C must have " + std::to_string(n) + " columns, got " + shape(C));
  }
  if (Q.rows() != n || Q.cols() != n) {
    fail(ErrorKind::DimensionMismatch, "Q must be " + shape(A) + ", got " + shape(Q));
  }
  const auto p = C.rows();
  if (R.rows() != p || R.cols() != p) {
    fail(ErrorKind::DimensionMismatch,
         "R must be " + std::to_string(p) + "x" + std::to_string(p) + ", got " + shape(R));
  }
  require_symmetric(Q, "Q", tol);
  require_symmetric(R, "R", tol);
  if (min_eigenvalue(Q) < -tol * std::max(1.0, Q.norm())) {
    fail(ErrorKind::CovarianceNotPSD, "Q has a negative eigenvalue");
  }
  if (min_eigenvalue(R) <= 0.0) {
    fail(ErrorKind::CovarianceNotPSD, "R is not positive definite");
  }
  if (!is_detectable(A, C)) {
    fail(ErrorKind::NotDetectable, "(A, C) has an unobservable mode with |lambda| >= 1");
  }
  return LinearSystem{std::move(A), std::move(B), std::move(C), std::move(Q),
                      std::move(R)};
}

bool is_detectable(const Matrix& A, const Matrix& C, double tol) {
  Eigen::EigenSolver<Matrix> es(A, false);
  if (es.info() != Eigen::Success) {
    fail(ErrorKind::EigensolverFailure, "detectability: eigensolver failed");
  }
  const auto n = A.rows();
  for (Eigen::Index i = 0; i < n; ++i) {
    const std::complex<double> lambda = es.eigenvalues()(i);
    if (std::abs(lambda) < 1.0 - 1e-12) continue;
    // PBH test: rank [lambda I - A; C] must equal n.
    Eigen::MatrixXcd pbh(n + C.rows(), n);
    pbh.topRows(n) = lambda * Eigen::MatrixXcd::Identity(n, n) - A.cast<std::complex<double>>();
    pbh.bottomRows(C.rows()) = C.cast<std::complex<double>>();
    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(pbh);
    const auto& s = svd.singularValues();
    const double thr = tol * std::max(1.0, s(0));
    if (s(n - 1) <= thr) return false;
  }
  return true;
}

bool EigenPair::is_real(double tol) const {
  return std::abs(lambda.imag()) <= tol * std::max(1.0, std::abs(lambda)) &&
         v.imag().norm() <= tol;
}

std::vector<EigenPair> unstable_eigenpairs(const Matrix& A, double tol) {
  Eigen::EigenSolver<Matrix> es(A, true);
  if (es.info() != Eigen::Success) {
    fail(ErrorKind::EigensolverFailure, "unstable_eigenpairs: eigensolver failed");
  }
  const auto n = A.rows();
  const double real_tol = 1e-8;
  std::vector<EigenPair> out;
  std::vector<double> seen_real;

  for (Eigen::Index i = 0; i < n; ++i) {
    const std::complex<double> lambda = es.eigenvalues()(i);
    if (std::abs(lambda) < 1.0 - tol) continue;
    const bool real = std::abs(lambda.imag()) <= real_tol * std::max(1.0, std::abs(lambda));
    if (!real) {
      EigenPair pair;
      pair.lambda = lambda;
      pair.v = es.eigenvectors().col(i).normalized();
      pair.unstable = true;
      out.push_back(std::move(pair));
      continue;
    }
    const double lr = lambda.real();
    const bool dup = std::any_of(seen_real.begin(), seen_real.end(), [&](double s) {
      return std::abs(s - lr) <= 1e-6 * std::max(1.0, std::abs(lr));
    });
    if (dup) continue;
    seen_real.push_back(lr);
    const Matrix shifted = A - lr * Matrix::Identity(n, n);
    const Matrix basis = null_space(shifted, 1e-9, /*force_one=*/true);
    for (Eigen::Index c = 0; c < basis.cols(); ++c) {
      Vector v = basis.col(c).normalized();
      Eigen::Index imax = 0;
      v.cwiseAbs().maxCoeff(&imax);
      if (v(imax) < 0) v = -v;
      EigenPair pair;
      pair.lambda = {lr, 0.0};
      pair.v = v.cast<std::complex<double>>();
      pair.unstable = true;
      out.push_back(std::move(pair));
    }
  }
  return out;
}

Matrix controllability_matrix(const Matrix& F, const Matrix& G) {
  const auto n = F.rows();
  if (F.cols() != n || G.rows() != n) {
    fail(ErrorKind::DimensionMismatch,
         "controllability_matrix: F " + shape(F) + " vs G " + shape(G));
  }
  const auto q = G.cols();
  Matrix out(n, n * q);
  Matrix block = G;
  for (Eigen::Index i = 0; i < n; ++i) {
    out.middleCols(i * q, q) = block;
    block = F * block;
  }
  return out;
}

bool in_span(const Vector& v, const Matrix& M, double tol) {
  const double vn = v.norm();
  if (vn == 0.0) return true;
  if (M.cols() == 0) return false;
  const Vector w = min_norm_solve(M, v);
  return (M * w - v).norm() <= tol * vn;
}

ControlLaw zero_law(int m) {
  return [m](int, const Vector&) { return Vector::Zero(m); };
}

ControlLaw open_loop(Series inputs) {
  return [inputs = std::move(inputs)](int k, const Vector&) -> Vector {
    if (k < 0 || k >= static_cast<int>(inputs.size())) {
      fail(ErrorKind::HorizonTooShort,
           "open-loop input sequence has no entry for step " + std::to_string(k));
    }
    return inputs[static_cast<std::size_t>(k)];
  };
}

ControlLaw state_feedback(Matrix gain) {
  return [gain = std::move(gain)](int, const Vector& x_hat) -> Vector {
    return -gain * x_hat;
  };
}

namespace {

Trajectory run(const LinearSystem& sys, const ControlLaw& law,
               const AttackSequence* attack, const SimulationOptions& opt) {
  const int T = opt.horizon;
  if (T < 1) fail(ErrorKind::InvalidArgument, "horizon must be >= 1");
  const int n = sys.n(), m = sys.m(), p = sys.p();

  if (attack) {
    if (attack->horizon() < T || static_cast<int>(attack->u_a.size()) < T) {
      fail(ErrorKind::HorizonTooShort,
           "attack covers " + std::to_string(attack->horizon()) +
               " steps, simulation needs " + std::to_string(T));
    }
  }
  Vector x = opt.x0.value_or(Vector::Zero(n));
  if (x.size() != n) fail(ErrorKind::DimensionMismatch, "x0 has wrong size");

  const Matrix Lq = noise_factor(sys.Q);
  const Matrix Lr = noise_factor(sys.R);
  std::mt19937_64 rng(opt.seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  auto draw = [&](int dim) {
    Vector xi(dim);
    for (int i = 0; i < dim; ++i) xi(i) = normal(rng);
    return xi;
  };
  if (opt.observer) opt.observer->reset();

  Trajectory traj;
  traj.noise_seed = opt.seed;
  traj.horizon = T;
  traj.states.reserve(T + 1);
  traj.outputs.reserve(T + 1);
  traj.transmitted.reserve(T + 1);
  traj.inputs.reserve(T);

  Vector u_prev = Vector::Zero(m);
  for (int k = 0; k <= T; ++k) {
    // Noise is drawn in a fixed order every step regardless of the attack or
    // channel so that paired runs see identical realizations.
    Vector v = Lr * draw(p);
    Vector w = Lq * draw(n);
    if (opt.noise_free) {
      v.setZero();
      w.setZero();
    }
    Vector sensed = sys.C * x + v;
    Vector packet = opt.channel ? Vector(opt.channel->encode * sensed) : sensed;
    if (attack) packet += attack->y_a[static_cast<std::size_t>(k)];
    Vector received = opt.channel ? Vector(opt.channel->decode * packet) : packet;

    Vector x_hat = Vector::Zero(n);
    if (opt.observer) {
      ObserverOutput o = opt.observer->update(u_prev, received);
      x_hat = o.x_hat;
      traj.estimates.push_back(std::move(o.x_hat));
      traj.residuals.push_back(std::move(o.residual));
    }
    traj.states.push_back(x);
    traj.outputs.push_back(std::move(received));
    traj.transmitted.push_back(std::move(packet));
    if (k == T) break;

    Vector u = law(k, x_hat);
    if (u.size() != m) fail(ErrorKind::DimensionMismatch, "control law returned wrong size");
    Vector applied = u;
    if (attack) applied += attack->u_a[static_cast<std::size_t>(k)];
    x = sys.A * x + sys.B * applied + w;
    traj.inputs.push_back(u);
    u_prev = std::move(u);
  }
  return traj;
}

}  // namespace

Trajectory simulate(const LinearSystem& sys, const ControlLaw& law,
                    const SimulationOptions& options) {
  return run(sys, law, nullptr, options);
}

Trajectory simulate_attacked(const LinearSystem& sys, const ControlLaw& law,
                             const AttackSequence& attack,
                             const SimulationOptions& options) {
  return run(sys, law, &attack, options);
}

}  // namespace cpscoding
