#pragma once

#include <complex>
#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "cpscoding/attack_sequence.hpp"
#include "cpscoding/linalg.hpp"

namespace cpscoding {

// Discrete-time plant x_{k+1} = A x_k + B u_k + w_k, y_k = C x_k + v_k with
// w ~ N(0, Q), v ~ N(0, R). Construct through make_system.
struct LinearSystem {
  Matrix A, B, C, Q, R;

  int n() const { return static_cast<int>(A.rows()); }
  int m() const { return static_cast<int>(B.cols()); }
  int p() const { return static_cast<int>(C.rows()); }
};

LinearSystem make_system(Matrix A, Matrix B, Matrix C, Matrix Q, Matrix R,
                         double tol = 1e-9);

bool is_detectable(const Matrix& A, const Matrix& C, double tol = 1e-8);

struct EigenPair {
  std::complex<double> lambda;
  Eigen::VectorXcd v;  // unit norm
  bool unstable = false;

  bool is_real(double tol = 1e-10) const;
  Vector real_vector() const { return v.real(); }
  double real_lambda() const { return lambda.real(); }
};

// All eigenpairs with |lambda| >= 1 - tol. Real eigenvalues get real
// eigenvectors (one per dimension of the eigenspace); sign fixed so the
// largest-magnitude component is positive.
std::vector<EigenPair> unstable_eigenpairs(const Matrix& A, double tol = 1e-9);
inline std::vector<EigenPair> unstable_eigenpairs(const LinearSystem& sys,
                                                  double tol = 1e-9) {
  return unstable_eigenpairs(sys.A, tol);
}

// [G, F G, ..., F^{n-1} G]
Matrix controllability_matrix(const Matrix& F, const Matrix& G);

// True iff min_w |M w - v| <= tol |v|.
bool in_span(const Vector& v, const Matrix& M, double tol = kDefaultRankTol);

using ControlLaw = std::function<Vector(int k, const Vector& x_hat)>;

ControlLaw zero_law(int m);
ControlLaw open_loop(Series inputs);
ControlLaw state_feedback(Matrix gain);  // u = -gain * x_hat

struct ObserverOutput {
  Vector x_hat;
  Vector residual;
};

// Estimator run inside the loop. update() consumes the measurement received
// at step k together with the input commanded at k-1 (zero at k = 0).
class Observer {
 public:
  virtual ~Observer() = default;
  virtual void reset() = 0;
  virtual ObserverOutput update(const Vector& u_prev, const Vector& y) = 0;
};

// Sensor-side encoding and estimator-side decoding of the output channel.
struct SensorChannel {
  Matrix encode;
  Matrix decode;
};

struct SimulationOptions {
  std::uint64_t seed = 0;
  int horizon = 1;
  std::optional<Vector> x0;            // defaults to 0
  bool noise_free = false;
  std::optional<SensorChannel> channel;
  Observer* observer = nullptr;        // reset at the start of every run
};

struct Trajectory {
  Series states;       // x_0 .. x_T
  Series outputs;      // measurement seen by the estimator (decoded)
  Series transmitted;  // packet on the wire (coded + injections)
  Series inputs;       // commanded u_0 .. u_{T-1}
  Series estimates;    // x_hat_k, empty without observer
  Series residuals;    // observer residual, empty without observer
  std::uint64_t noise_seed = 0;
  int horizon = 0;
};

Trajectory simulate(const LinearSystem& sys, const ControlLaw& law,
                    const SimulationOptions& options);

// Same seed as simulate() draws the same noise; injections enter as
// x'_{k+1} = A x'_k + B(u'_k + u^a_k) + w_k and Y'_k = encode(C x'_k + v_k) + y^a_k.
Trajectory simulate_attacked(const LinearSystem& sys, const ControlLaw& law,
                             const AttackSequence& attack,
                             const SimulationOptions& options);

}  // namespace cpscoding
