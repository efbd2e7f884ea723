#pragma once

#include <optional>
#include <vector>

#include "cpscoding/linalg.hpp"
#include "cpscoding/lti.hpp"

namespace cpscoding {

// Which matrix the chi-square statistic g = z' W z uses.
//   InnovationCov: W = (C P C' + R)^-1, a proper chi-square with p dof.
//   StateCov:      W = P^-1, only meaningful if p == n. For p != n the design
//                  falls back to InnovationCov and sets literal_fallback.
enum class DetectorMode { InnovationCov, StateCov };

struct KalmanOptions {
  double tol = 1e-13;             // relative change in P between iterations
  int max_iter = 100000;
  double confidence = 0.99;
  DetectorMode mode = DetectorMode::InnovationCov;
  std::optional<Matrix> theta;    // initial P, identity by default
};

struct KalmanDesign {
  Matrix P;          // steady-state prediction error covariance
  Matrix K;          // P C' (C P C' + R)^-1
  Matrix F;          // A - K C A
  Matrix S;          // innovation covariance C P C' + R
  Matrix W;          // quadratic form used by chi2_stat
  double alpha = 0;  // alarm threshold
  double confidence = 0.99;
  DetectorMode mode = DetectorMode::InnovationCov;
  bool literal_fallback = false;
  int iterations = 0;
};

KalmanDesign steady_state_kalman(const LinearSystem& sys,
                                 const KalmanOptions& options = {});

// Frobenius norm of P - Ric(P).
double riccati_residual(const LinearSystem& sys, const Matrix& P);

double chi2_quantile(double confidence, int dof);

struct FilterState {
  Vector x_hat;
  int k = 0;
};

struct KalmanStepResult {
  FilterState state;
  Vector z;
};

// z = y - C(A x_hat + B u_prev); x_hat+ = A x_hat + B u_prev + K z.
KalmanStepResult kalman_step(const KalmanDesign& design, const LinearSystem& sys,
                             const FilterState& state, const Vector& u_prev,
                             const Vector& y);

double chi2_stat(const KalmanDesign& design, const Vector& z);

std::optional<int> detect(const std::vector<double>& g, double alpha);

struct ResidueTrace {
  Series z;
  std::vector<double> g;
  Series eta;  // S^{-1/2} z
  std::optional<int> alarm_time;
};

ResidueTrace residue_trace(const KalmanDesign& design, const Series& z);

// Steady-state Kalman filter as an in-loop observer. The first update treats
// the previous estimate as zero, i.e. the prediction of x_0 is 0.
class KalmanObserver : public Observer {
 public:
  KalmanObserver(const LinearSystem& sys, KalmanDesign design);

  void reset() override;
  ObserverOutput update(const Vector& u_prev, const Vector& y) override;

  const KalmanDesign& design() const { return design_; }

 private:
  LinearSystem sys_;
  KalmanDesign design_;
  FilterState state_;
};

// Fault-detection filter x_hat+ = A x_hat + B u + H(y - C x_hat),
// r = V(y - C x_hat).
struct FdFilter {
  Matrix H;
  Matrix V;
};

FdFilter make_fd_filter(const LinearSystem& sys, Matrix H, Matrix V);

struct FdStepResult {
  FilterState state;
  Vector r;
};

FdStepResult fd_filter_step(const FdFilter& filter, const LinearSystem& sys,
                            const FilterState& state, const Vector& u,
                            const Vector& y);

// In-loop wrapper. x_hat_k is formed from data up to k-1, so the residual at
// k uses the one-step prediction.
class FdObserver : public Observer {
 public:
  FdObserver(const LinearSystem& sys, FdFilter filter);

  void reset() override;
  ObserverOutput update(const Vector& u_prev, const Vector& y) override;

 private:
  LinearSystem sys_;
  FdFilter filter_;
  FilterState state_;
  std::optional<Vector> last_y_;
};

// k -> law(k, x_hat) + u_d[k]; u_d entries past its end count as zero.
ControlLaw apply_active_monitor(ControlLaw law, Series u_d);

// Plant as seen through the coded channel: C -> Sigma C, R -> Sigma R Sigma'.
// Used when the defender redesigns its gain for the coded outputs.
LinearSystem coded_system(const LinearSystem& sys, const Matrix& sigma);

}  // namespace cpscoding
