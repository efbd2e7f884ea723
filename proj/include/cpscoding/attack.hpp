#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "cpscoding/attack_sequence.hpp"
#include "cpscoding/coding.hpp"
#include "cpscoding/estimation.hpp"
#include "cpscoding/lti.hpp"

namespace cpscoding {

struct StealthVerdict {
  bool feasible = false;
  std::vector<EigenPair> pairs;  // qualifying real unstable pairs
  std::string reason;            // set when infeasible
};

StealthVerdict stealth_feasible(const LinearSystem& sys, const KalmanDesign& design,
                                double tol = kDefaultRankTol);

// Two-phase sensor-only attack. Samples 0..n-1 steer the estimation error
// difference to s*v (minimum-norm solve); later samples follow
// y_{n+i} = y_i - s lambda^{i+1} C v. The scale s is the largest value with
// max_k |dz_k| <= M over the horizon.
AttackSequence synth_sensor_attack(const LinearSystem& sys, const KalmanDesign& design,
                                   const EigenPair& pair, double M, int T);

struct CombinedAttackOptions {
  double u_bound = 1.0;
  double M = 2.0;
  int T = 200;
  std::uint64_t seed = 0;
  double eps_bound = 0.0;  // |eps_k| <= min(eps_bound, M), seeded; 0 means none
};

// Constant actuator injection along an unstable mode (random direction when A
// has no real unstable mode) with sensor injections that cancel its effect on
// the residue: y_{k+1} = -C A de_k - C B u_k + eps_{k+1}. y_0 = eps_0.
AttackSequence synth_combined_attack(const LinearSystem& sys, const KalmanDesign& design,
                                     const CombinedAttackOptions& options);

// Decoded: estimator keeps K and sees Sigma^-1 y^a.
// Redesigned: estimator uses a gain designed for (A, Sigma C) and the residue
// is formed in the coded frame.
enum class GainMode { Decoded, Redesigned };

struct DifferenceTrace {
  Series de;  // 0..T
  Series dz;  // 0..T
  bool coded = false;
  std::optional<Matrix> sigma;
  GainMode gain = GainMode::Decoded;

  std::vector<double> de_norms() const;
  std::vector<double> dz_norms() const;
};

// Noise-free difference between an attacked and a nominal run. The step
// before k = 0 has zero difference, so de_0 = -K y_0, dz_0 = y_0.
DifferenceTrace difference_dynamics(const LinearSystem& sys, const KalmanDesign& design,
                                    const AttackSequence& attack, int T,
                                    const CodingMatrix* coding = nullptr,
                                    GainMode gain = GainMode::Decoded);

// y_0, y_1 given, y_k = y_{k-2} - y_0 afterwards; u^a zero.
AttackSequence alternating_recursion_attack(const Vector& y0, const Vector& y1, int m,
                                            int T);

}  // namespace cpscoding
