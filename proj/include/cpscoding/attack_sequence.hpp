#pragma once

#include <optional>
#include <string>

#include "cpscoding/linalg.hpp"

namespace cpscoding {

// How an attack was produced; informational only.
struct AttackMeta {
  std::string origin = "external";  // "sensor", "combined", "adapted", ...
  std::optional<double> eigenvalue;
  std::optional<Vector> eigenvector;
  std::optional<Vector> y_star;      // Cv for sensor attacks
  std::optional<double> scale;       // s for sensor attacks
  int phase1_length = 0;
  std::optional<Matrix> sigma_hat;   // set by adapt_attack
};

// Time-indexed injections. Index k carries y^a_k (added to the measurement
// at step k) and u^a_k (added to the input applied between k and k+1).
struct AttackSequence {
  Series y_a;
  Series u_a;
  double budget = 0.0;  // M the sequence was designed for (0 if unknown)
  AttackMeta meta;

  int horizon() const { return static_cast<int>(y_a.size()) - 1; }
  bool sensor_only(double tol = 0.0) const;

  static AttackSequence zeros(int p, int m, int horizon);
};

}  // namespace cpscoding
