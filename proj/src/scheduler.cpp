#include "cpscoding/scheduler.hpp"

#include <algorithm>
#include <cstdio>
#include <ostream>

#include "cpscoding/error.hpp"

namespace cpscoding {

std::optional<int> stealth_time(const DifferenceTrace& trace, double M) {
  for (std::size_t k = 0; k < trace.dz.size(); ++k) {
    if (trace.dz[k].norm() > M) return static_cast<int>(k);
  }
  return std::nullopt;
}

double censor(std::optional<int> ts, int horizon) {
  return ts ? static_cast<double>(*ts) : static_cast<double>(horizon + 1);
}

double stealth_gain(std::optional<int> ts_base, std::optional<int> ts_adapted, int horizon) {
  if (!ts_base) fail(ErrorKind::BaseNeverDetected, "base attack is never detected; gain undefined");
  if (*ts_base < 1) {
    fail(ErrorKind::InvalidArgument, "base attack detected at k = 0; gain undefined");
  }
  const double b = static_cast<double>(*ts_base);
  return (censor(ts_adapted, horizon) - b) / b;
}

namespace {

void prepare_sensor_attack(const AttackSequence& base, int horizon) {
  if (!base.sensor_only()) fail(ErrorKind::InvalidArgument, "base attack must be sensor-only");
  if (base.horizon() < horizon) {
    fail(ErrorKind::HorizonTooShort, "base attack shorter than the evaluation horizon");
  }
}

}  // namespace

AdaptedOutcome adapted_outcome(const LinearSystem& sys, const KalmanDesign& design,
                               const CodingMatrix& sigma, const AttackSequence& base,
                               const MeasurementLog& log, const PipelineConfig& cfg) {
  AdaptedOutcome out;
  EstimateResult est;
  if (cfg.estimator == EstimatorKind::FullLog) {
    AlsOptions als = cfg.alg2.als;
    als.rank_tol = cfg.alg2.rank_tol;
    const BilinearProblem pr = build_bilinear(sys.A, sys.B, sys.C, log);
    est = solve_bilinear_als(pr, Matrix::Identity(sys.p(), sys.p()), Vector::Zero(sys.n()), als);
    out.exhausted = !(est.full_rank && est.cost <= cfg.alg2.epsilon);
  } else {
    try {
      est = alg2_estimate(sys.A, sys.B, sys.C, log, cfg.alg2);
    } catch (const ExhaustedError& e) {
      // The attacker goes ahead with the best estimate it has.
      est = e.last();
      out.exhausted = true;
    }
  }
  out.sigma_hat = est.sigma_hat;
  out.cost = est.cost;
  const AttackSequence adapted = adapt_attack(est.sigma_hat, base);
  out.trace = difference_dynamics(sys, design, adapted, cfg.horizon, &sigma);
  out.ts = stealth_time(out.trace, cfg.M);
  return out;
}

GainResult stealth_gain_with_estimate(const LinearSystem& sys, const KalmanDesign& design,
                                      const CodingMatrix& sigma, const AttackSequence& base,
                                      const Matrix& sigma_hat, const PipelineConfig& cfg) {
  prepare_sensor_attack(base, cfg.horizon);
  GainResult g;
  g.ts_base = stealth_time(difference_dynamics(sys, design, base, cfg.horizon, &sigma), cfg.M);
  if (!g.ts_base) fail(ErrorKind::BaseNeverDetected, "base attack is never detected on the coded plant");
  const AttackSequence adapted = adapt_attack(sigma_hat, base);
  g.ts_adapted = stealth_time(difference_dynamics(sys, design, adapted, cfg.horizon, &sigma), cfg.M);
  g.sigma_hat = sigma_hat;
  g.alpha = stealth_gain(g.ts_base, g.ts_adapted, cfg.horizon);
  return g;
}

GainResult stealth_gain(const LinearSystem& sys, const KalmanDesign& design,
                        const CodingMatrix& sigma, const AttackSequence& base, int N,
                        const PipelineConfig& cfg) {
  if (N < 0) fail(ErrorKind::InvalidArgument, "N must be non-negative");
  prepare_sensor_attack(base, cfg.horizon);
  GainResult g;
  g.ts_base = stealth_time(difference_dynamics(sys, design, base, cfg.horizon, &sigma), cfg.M);
  if (!g.ts_base) fail(ErrorKind::BaseNeverDetected, "base attack is never detected on the coded plant");
  RecordingOptions rec = cfg.recording;
  rec.length = N + 1;
  const MeasurementLog log = record_coded_traffic(sys, sigma, rec);
  const AdaptedOutcome o = adapted_outcome(sys, design, sigma, base, log, cfg);
  g.ts_adapted = o.ts;
  g.sigma_hat = o.sigma_hat;
  g.cost = o.cost;
  g.estimate_exhausted = o.exhausted;
  g.alpha = stealth_gain(g.ts_base, g.ts_adapted, cfg.horizon);
  return g;
}

int alg3_schedule(const StealthTimeOracle& ts_of_N, std::optional<int> ts_base, int t_s,
                  double alpha_threshold, int horizon, int max_N) {
  if (t_s < 1) fail(ErrorKind::InvalidArgument, "t_s must be >= 1");
  if (!ts_base) fail(ErrorKind::BaseNeverDetected, "base attack is never detected");
  int N = 0;
  double alpha = 0.0;  // Sigma_hat = I reproduces the base attack
  while (alpha < alpha_threshold) {
    if (N + t_s > max_N) {
      fail(ErrorKind::HorizonExhausted,
           "alpha stayed below the threshold up to N = " + std::to_string(N));
    }
    N += t_s;
    alpha = stealth_gain(ts_base, ts_of_N(N), horizon);
  }
  return N;
}

int alg3_schedule(const LinearSystem& sys, const KalmanDesign& design,
                  const CodingMatrix& sigma, const AttackSequence& base, int t_s,
                  double alpha_threshold, const ScheduleConfig& cfg) {
  const PipelineConfig& pc = cfg.pipeline;
  prepare_sensor_attack(base, pc.horizon);
  const auto ts_base =
      stealth_time(difference_dynamics(sys, design, base, pc.horizon, &sigma), pc.M);
  if (!ts_base) fail(ErrorKind::BaseNeverDetected, "base attack is never detected on the coded plant");
  // Measurements are saved across rounds: one recording, growing prefixes.
  RecordingOptions rec = pc.recording;
  rec.length = cfg.max_N + 1;
  const MeasurementLog log = record_coded_traffic(sys, sigma, rec);
  auto oracle = [&](int N) {
    return adapted_outcome(sys, design, sigma, base, log.prefix(N + 1), pc).ts;
  };
  return alg3_schedule(oracle, ts_base, t_s, alpha_threshold, pc.horizon, cfg.max_N);
}

StealthReport stealth_report(const LinearSystem& sys, const KalmanDesign& design,
                             const CodingMatrix& sigma, const AttackSequence& base,
                             const std::vector<int>& Ns, const PipelineConfig& cfg) {
  prepare_sensor_attack(base, cfg.horizon);
  StealthReport rep;
  rep.M = cfg.M;
  rep.horizon = cfg.horizon;
  rep.ts_base = stealth_time(difference_dynamics(sys, design, base, cfg.horizon, &sigma), cfg.M);
  if (!rep.ts_base) fail(ErrorKind::BaseNeverDetected, "base attack is never detected on the coded plant");
  if (Ns.empty()) return rep;
  const int max_N = *std::max_element(Ns.begin(), Ns.end());
  RecordingOptions rec = cfg.recording;
  rec.length = max_N + 1;
  const MeasurementLog log = record_coded_traffic(sys, sigma, rec);
  for (int N : Ns) {
    if (N < 0) fail(ErrorKind::InvalidArgument, "N must be non-negative");
    const AdaptedOutcome o = adapted_outcome(sys, design, sigma, base, log.prefix(N + 1), cfg);
    rep.ts_adapted[N] = o.ts;
    rep.alpha_of_N[N] = stealth_gain(rep.ts_base, o.ts, cfg.horizon);
    rep.sigma_hat[N] = o.sigma_hat;
  }
  return rep;
}

void StealthReport::write_csv(std::ostream& os) const {
  os << "N,T_s,detected,alpha\n";
  char buf[64];
  for (const auto& [N, ts] : ts_adapted) {
    std::snprintf(buf, sizeof buf, "%.12e", alpha_of_N.at(N));
    os << N << "," << static_cast<long>(censor(ts, horizon)) << "," << (ts ? 1 : 0) << ","
       << buf << "\n";
  }
}

}  // namespace cpscoding
