#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "cpscoding/attack_sequence.hpp"
#include "cpscoding/coding.hpp"
#include "cpscoding/error.hpp"
#include "cpscoding/lti.hpp"

namespace cpscoding {

// Coded outputs Y_k and inputs u_k seen by an eavesdropper, k = 0 at the
// start of recording. N in the estimation equations is size() - 1.
class MeasurementLog {
 public:
  MeasurementLog() = default;
  MeasurementLog(int p, int m) : p_(p), m_(m) {}

  void record(const Vector& Y, const Vector& u);

  int size() const { return static_cast<int>(Y_.size()); }
  bool empty() const { return Y_.empty(); }
  int p() const { return p_; }
  int m() const { return m_; }
  const Series& Y() const { return Y_; }
  const Series& u() const { return u_; }

  MeasurementLog prefix(int count) const;

  void write_csv(std::ostream& os) const;
  static MeasurementLog read_csv(std::istream& is);

 private:
  int p_ = -1;
  int m_ = -1;
  Series Y_;
  Series u_;
};

// Y_k = Sigma (T_k x0 + S_k), T_k = C A^k, S_k = C sum_{j<k} A^{k-1-j} B u_j.
struct BilinearProblem {
  std::vector<Matrix> T;
  Series S;
  Vector d;  // stacked Y_0..Y_N
  int p = 0;
  int n = 0;

  int steps() const { return static_cast<int>(T.size()); }
  Vector observation(int k) const { return d.segment(k * p, p); }
};

BilinearProblem build_bilinear(const Matrix& A, const Matrix& B, const Matrix& C,
                               const MeasurementLog& log);

// Sum of squared residuals of all p(N+1) equations.
double bilinear_cost(const BilinearProblem& problem, const Matrix& sigma, const Vector& x0);

struct AlsOptions {
  double tol = 1e-12;     // stop when relative cost decrease falls below
  int max_iter = 200;
  double rank_tol = 1e-6;
  int nstarts = 1;        // extra starts perturb the initial Sigma
  std::uint64_t seed = 0; // perturbation draws for nstarts > 1
  double perturbation = 0.5;
};

struct EstimateResult {
  Matrix sigma_hat;
  Vector x0_hat;
  double cost = 0.0;
  bool full_rank = false;
  int iterations = 0;
  bool degenerate = false;          // some inner solve was rank deficient
  std::vector<double> cost_history; // cost after every half step
  int observations = 0;             // filled by alg2_estimate
};

// Alternating least squares over x0 then the rows of Sigma. Both inner solves
// take the minimum-norm correction from the current iterate.
EstimateResult solve_bilinear_als(const BilinearProblem& problem, const Matrix& init_sigma,
                                  const Vector& init_x0, const AlsOptions& options = {});

// Solve with x0 held fixed (linear in Sigma).
EstimateResult solve_sigma_given_x0(const BilinearProblem& problem, const Vector& x0,
                                    const AlsOptions& options = {});

class ExhaustedError : public Error {
 public:
  ExhaustedError(const std::string& message, EstimateResult last)
      : Error(ErrorKind::Exhausted, message), last_(std::move(last)) {}
  const EstimateResult& last() const { return last_; }

 private:
  EstimateResult last_;
};

struct Alg2Options {
  double epsilon = 1e-8;
  double rank_tol = 1e-6;
  int max_steps = 0;          // 0: every observation in the stream
  double identity_tol = 1e-9;
  AlsOptions als;
};

// Reads one observation at a time from the stream, re-solves warm-started,
// and stops once the cost is at most epsilon with a full-rank, non-identity
// Sigma_hat. Throws ExhaustedError otherwise.
EstimateResult alg2_estimate(const Matrix& A, const Matrix& B, const Matrix& C,
                             const MeasurementLog& stream, const Alg2Options& options = {});

AttackSequence adapt_attack(const Matrix& sigma_hat, const AttackSequence& base);

struct RecordingOptions {
  int length = 21;           // observations recorded
  std::uint64_t seed = 0;    // plant noise
  std::uint64_t input_seed = 1;
  double input_sigma = 1.0;  // i.i.d. N(0, input_sigma^2) actuator excitation
  bool noise_free = false;
};

// Open-loop run of the coded plant from x0 = 0, as recorded by an
// eavesdropper on the coded channel.
MeasurementLog record_coded_traffic(const LinearSystem& sys, const CodingMatrix& coding,
                                    const RecordingOptions& options);

}  // namespace cpscoding
