#include "cpscoding/estimation.hpp"

#include <boost/math/distributions/chi_squared.hpp>
#include <cmath>
#include <string>

#include "cpscoding/error.hpp"

namespace cpscoding {

namespace {

Matrix riccati_map(const LinearSystem& sys, const Matrix& P) {
  const Matrix S = sys.C * P * sys.C.transpose() + sys.R;
  const Matrix gain = P * sys.C.transpose() * S.inverse();
  const Matrix post = P - gain * sys.C * P;
  Matrix next = sys.A * post * sys.A.transpose() + sys.Q;
  return 0.5 * (next + next.transpose());
}

Matrix spd_inverse(const Matrix& m, const char* what) {
  Eigen::LLT<Matrix> llt(0.5 * (m + m.transpose()));
  if (llt.info() != Eigen::Success) {
    fail(ErrorKind::SingularQuadraticForm, std::string(what) + " is not positive definite");
  }
  return llt.solve(Matrix::Identity(m.rows(), m.cols()));
}

}  // namespace

double riccati_residual(const LinearSystem& sys, const Matrix& P) {
  return (P - riccati_map(sys, P)).norm();
}

double chi2_quantile(double confidence, int dof) {
  if (!(confidence > 0.0 && confidence < 1.0) || dof < 1) {
    fail(ErrorKind::InvalidArgument, "chi2_quantile needs 0 < confidence < 1 and dof >= 1");
  }
  boost::math::chi_squared dist(static_cast<double>(dof));
  return boost::math::quantile(dist, confidence);
}

KalmanDesign steady_state_kalman(const LinearSystem& sys, const KalmanOptions& opt) {
  const int n = sys.n();
  Matrix P = opt.theta.value_or(Matrix::Identity(n, n));
  if (P.rows() != n || P.cols() != n) {
    fail(ErrorKind::DimensionMismatch, "Kalman initial covariance has wrong shape");
  }
  int it = 0;
  bool converged = false;
  // Plain fixed-point iteration; after the tolerance is met a few extra
  // sweeps push the residual down to round-off.
  for (; it < opt.max_iter; ++it) {
    Matrix next = riccati_map(sys, P);
    const double change = (next - P).norm();
    P = std::move(next);
    if (!P.allFinite()) break;
    if (change <= opt.tol * (1.0 + P.norm())) {
      converged = true;
      break;
    }
  }
  if (!converged) {
    fail(ErrorKind::RiccatiNoConvergence,
         "no fixed point after " + std::to_string(it) + " iterations");
  }
  for (int extra = 0; extra < 5; ++extra) P = riccati_map(sys, P);

  KalmanDesign d;
  d.P = P;
  d.S = sys.C * P * sys.C.transpose() + sys.R;
  d.S = 0.5 * (d.S + d.S.transpose());
  d.K = P * sys.C.transpose() * d.S.inverse();
  d.F = sys.A - d.K * sys.C * sys.A;
  d.confidence = opt.confidence;
  d.alpha = chi2_quantile(opt.confidence, sys.p());
  d.mode = opt.mode;
  d.iterations = it + 1;
  if (opt.mode == DetectorMode::StateCov && sys.p() == n) {
    d.W = spd_inverse(P, "P");
  } else {
    d.literal_fallback = opt.mode == DetectorMode::StateCov;
    d.mode = DetectorMode::InnovationCov;
    d.W = spd_inverse(d.S, "innovation covariance");
  }
  if (spectral_radius(d.F) >= 1.0) {
    fail(ErrorKind::UnstableObserver, "A - KCA is not Schur stable");
  }
  return d;
}

KalmanStepResult kalman_step(const KalmanDesign& design, const LinearSystem& sys,
                             const FilterState& state, const Vector& u_prev,
                             const Vector& y) {
  const Vector pred = sys.A * state.x_hat + sys.B * u_prev;
  Vector z = y - sys.C * pred;
  KalmanStepResult out;
  out.state.x_hat = pred + design.K * z;
  out.state.k = state.k + 1;
  out.z = std::move(z);
  return out;
}

double chi2_stat(const KalmanDesign& design, const Vector& z) {
  if (z.size() != design.W.rows()) {
    fail(ErrorKind::DimensionMismatch, "residue has wrong size for the detector");
  }
  return std::max(0.0, z.dot(design.W * z));
}

std::optional<int> detect(const std::vector<double>& g, double alpha) {
  for (std::size_t k = 0; k < g.size(); ++k) {
    if (g[k] > alpha) return static_cast<int>(k);
  }
  return std::nullopt;
}

ResidueTrace residue_trace(const KalmanDesign& design, const Series& z) {
  ResidueTrace t;
  t.z = z;
  const Matrix root = symmetric_inv_sqrt(design.S);
  t.g.reserve(z.size());
  t.eta.reserve(z.size());
  for (const auto& zk : z) {
    t.g.push_back(chi2_stat(design, zk));
    t.eta.push_back(root * zk);
  }
  t.alarm_time = detect(t.g, design.alpha);
  return t;
}

KalmanObserver::KalmanObserver(const LinearSystem& sys, KalmanDesign design)
    : sys_(sys), design_(std::move(design)) {
  reset();
}

void KalmanObserver::reset() {
  state_.x_hat = Vector::Zero(sys_.n());
  state_.k = 0;
}

ObserverOutput KalmanObserver::update(const Vector& u_prev, const Vector& y) {
  KalmanStepResult r = kalman_step(design_, sys_, state_, u_prev, y);
  state_ = r.state;
  return {state_.x_hat, std::move(r.z)};
}

FdFilter make_fd_filter(const LinearSystem& sys, Matrix H, Matrix V) {
  if (H.rows() != sys.n() || H.cols() != sys.p() || V.cols() != sys.p()) {
    fail(ErrorKind::DimensionMismatch, "fault-detection filter gains have wrong shape");
  }
  if (spectral_radius(sys.A - H * sys.C) >= 1.0) {
    fail(ErrorKind::UnstableObserver, "A - HC is not Schur stable");
  }
  return FdFilter{std::move(H), std::move(V)};
}

FdStepResult fd_filter_step(const FdFilter& filter, const LinearSystem& sys,
                            const FilterState& state, const Vector& u,
                            const Vector& y) {
  const Vector innov = y - sys.C * state.x_hat;
  FdStepResult out;
  out.r = filter.V * innov;
  out.state.x_hat = sys.A * state.x_hat + sys.B * u + filter.H * innov;
  out.state.k = state.k + 1;
  return out;
}

FdObserver::FdObserver(const LinearSystem& sys, FdFilter filter)
    : sys_(sys), filter_(std::move(filter)) {
  reset();
}

void FdObserver::reset() {
  state_.x_hat = Vector::Zero(sys_.n());
  state_.k = 0;
  last_y_.reset();
}

ObserverOutput FdObserver::update(const Vector& u_prev, const Vector& y) {
  if (last_y_) state_ = fd_filter_step(filter_, sys_, state_, u_prev, *last_y_).state;
  last_y_ = y;
  Vector r = filter_.V * (y - sys_.C * state_.x_hat);
  return {state_.x_hat, std::move(r)};
}

ControlLaw apply_active_monitor(ControlLaw law, Series u_d) {
  return [law = std::move(law), u_d = std::move(u_d)](int k, const Vector& x_hat) -> Vector {
    Vector u = law(k, x_hat);
    if (k >= 0 && k < static_cast<int>(u_d.size())) u += u_d[static_cast<std::size_t>(k)];
    return u;
  };
}

LinearSystem coded_system(const LinearSystem& sys, const Matrix& sigma) {
  if (sigma.rows() != sys.p() || sigma.cols() != sys.p()) {
    fail(ErrorKind::DimensionMismatch, "coding matrix must be p x p");
  }
  LinearSystem out = sys;
  out.C = sigma * sys.C;
  out.R = sigma * sys.R * sigma.transpose();
  out.R = 0.5 * (out.R + out.R.transpose());
  return out;
}

}  // namespace cpscoding
