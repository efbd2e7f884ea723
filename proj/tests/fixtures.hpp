#pragma once

#include <random>

#include "cpscoding/attack.hpp"
#include "cpscoding/coding.hpp"
#include "cpscoding/estimation.hpp"
#include "cpscoding/lti.hpp"

namespace fixtures {

using cpscoding::Matrix;
using cpscoding::Vector;

inline cpscoding::LinearSystem plant(double q = 0.01, double r = 0.01) {
  Matrix A(2, 2), B(2, 1), C(2, 2);
  A << 0.8, 0.0, 0.5, 1.0;
  B << 1.0, 0.5;
  C << 2.0, 0.5, 0.0, 1.0;
  return cpscoding::make_system(A, B, C, q * Matrix::Identity(2, 2), r * Matrix::Identity(2, 2));
}

inline Matrix sigma1() {
  Matrix s(2, 2);
  s << 2.0, -0.5, -0.5, 1.0;
  return s;
}

inline Matrix sigma2() {
  Matrix s(2, 2);
  s << 1.0, -1.0, 2.0, 0.0;
  return s;
}

inline Matrix rotation() {
  Matrix s(2, 2);
  s << 0.7, 0.5, -0.5, 0.7;
  return s;
}

inline Matrix gaussian(std::mt19937_64& rng, int rows, int cols, double sd = 1.0) {
  std::normal_distribution<double> d(0.0, sd);
  Matrix m(rows, cols);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) m(i, j) = d(rng);
  return m;
}

// First qualifying pair of the reference plant and its budget-2 attack.
inline cpscoding::AttackSequence sensor_attack(const cpscoding::LinearSystem& sys,
                                               const cpscoding::KalmanDesign& d, double M = 2.0,
                                               int T = 200) {
  const auto v = cpscoding::stealth_feasible(sys, d);
  return cpscoding::synth_sensor_attack(sys, d, v.pairs.at(0), M, T);
}

}  // namespace fixtures
