#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <map>
#include <optional>
#include <vector>

#include "cpscoding/adversary.hpp"
#include "cpscoding/attack.hpp"
#include "cpscoding/coding.hpp"
#include "cpscoding/estimation.hpp"

namespace cpscoding {

// First k with |dz_k| > M; nullopt when the trace never crosses M.
std::optional<int> stealth_time(const DifferenceTrace& trace, double M);

// NeverDetected counts as horizon + 1, one past the last inspected step.
double censor(std::optional<int> ts, int horizon);

// (T_s(adapted) - T_s(base)) / T_s(base). BaseNeverDetected when the base
// attack is never caught.
double stealth_gain(std::optional<int> ts_base, std::optional<int> ts_adapted, int horizon);

// How the attacker turns a log into Sigma_hat(N).
//   FullLog: ALS on every recorded observation, started from Sigma_hat = I.
//   Alg2:    the early-stopping loop of alg2_estimate.
enum class EstimatorKind { FullLog, Alg2 };

struct PipelineConfig {
  double M = 2.0;
  EstimatorKind estimator = EstimatorKind::FullLog;
  int horizon = 500;      // steps of the difference traces
  RecordingOptions recording;  // length is set from N
  Alg2Options alg2;
};

struct GainResult {
  double alpha = 0.0;
  std::optional<int> ts_base;
  std::optional<int> ts_adapted;
  Matrix sigma_hat;
  double cost = 0.0;
  bool estimate_exhausted = false;
};

// Estimate Sigma from a log, adapt the base attack and measure its stealth
// time on the coded plant.
struct AdaptedOutcome {
  Matrix sigma_hat;
  double cost = 0.0;
  bool exhausted = false;
  std::optional<int> ts;
  DifferenceTrace trace;
};

AdaptedOutcome adapted_outcome(const LinearSystem& sys, const KalmanDesign& design,
                               const CodingMatrix& sigma, const AttackSequence& base,
                               const MeasurementLog& log, const PipelineConfig& cfg);

// Full loop: record N + 1 coded observations, estimate, adapt, compare.
GainResult stealth_gain(const LinearSystem& sys, const KalmanDesign& design,
                        const CodingMatrix& sigma, const AttackSequence& base, int N,
                        const PipelineConfig& cfg);

// Same but with the attacker's estimate supplied directly.
GainResult stealth_gain_with_estimate(const LinearSystem& sys, const KalmanDesign& design,
                                      const CodingMatrix& sigma, const AttackSequence& base,
                                      const Matrix& sigma_hat, const PipelineConfig& cfg);

// T_s of the adapted attack after N measurements.
using StealthTimeOracle = std::function<std::optional<int>(int N)>;

// Starts at N = 0 (Sigma_hat = I, alpha = 0) and adds t_s measurements per
// round until alpha(N) >= threshold. HorizonExhausted once N would pass max_N.
int alg3_schedule(const StealthTimeOracle& ts_of_N, std::optional<int> ts_base, int t_s,
                  double alpha_threshold, int horizon, int max_N);

struct ScheduleConfig {
  PipelineConfig pipeline;
  int max_N = 200;
};

int alg3_schedule(const LinearSystem& sys, const KalmanDesign& design,
                  const CodingMatrix& sigma, const AttackSequence& base, int t_s,
                  double alpha_threshold, const ScheduleConfig& cfg);

struct StealthReport {
  std::optional<int> ts_base;
  std::map<int, std::optional<int>> ts_adapted;
  std::map<int, double> alpha_of_N;
  std::map<int, Matrix> sigma_hat;
  double M = 0.0;
  int horizon = 0;

  void write_csv(std::ostream& os) const;
};

// One recording long enough for max(Ns); each N uses its prefix.
StealthReport stealth_report(const LinearSystem& sys, const KalmanDesign& design,
                             const CodingMatrix& sigma, const AttackSequence& base,
                             const std::vector<int>& Ns, const PipelineConfig& cfg);

}  // namespace cpscoding
