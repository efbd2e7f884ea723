#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "cpscoding/attack.hpp"
#include "cpscoding/estimation.hpp"
#include "cpscoding/scheduler.hpp"
#include "cpscoding/serialization.hpp"

namespace cpscoding {

inline constexpr const char* kVersion = "0.1.0";

struct SystemSpec {
  Matrix A, B, C, Q, R;
  std::optional<Vector> x0;
  std::optional<Matrix> feedback;  // u = -L x_hat; zero input when absent
};

enum class AttackKind { None, Sensor, Combined, External, Recursion };

struct AttackSpec {
  AttackKind kind = AttackKind::None;
  std::optional<double> budget;  // design budget, defaults to M
  int eigen_index = 0;           // which qualifying eigenpair to use
  double u_bound = 1.0;
  double eps_bound = 0.0;
  std::string file;              // External: JSON attack file
  Vector y0, y1;                 // Recursion
};

enum class CodingKind { None, Manual, Algorithm1 };

struct CodingSpec {
  CodingKind kind = CodingKind::None;
  Matrix sigma;
  double scale = 1.0;
  GainMode gain = GainMode::Decoded;
};

struct AdversarySpec {
  bool enabled = false;
  std::vector<int> Ns;
  double epsilon = 1e-8;
  double rank_tol = 1e-6;
  int nstarts = 1;
  int max_iter = 200;
  double tol = 1e-12;
  double input_sigma = 1.0;
  EstimatorKind estimator = EstimatorKind::FullLog;
};

struct ScheduleSpec {
  bool enabled = false;
  int t_s = 5;
  double threshold = 1.5;
  int max_N = 200;
};

struct SimulationSpec {
  bool enabled = false;
  int horizon = 0;  // 0: scenario horizon
  bool noise_free = false;
};

struct Seeds {
  std::uint64_t plant = 0;
  std::uint64_t coding = 0;
  std::uint64_t solver = 0;
  std::uint64_t input = 1;
};

struct Scenario {
  std::string name;
  std::string description;
  SystemSpec system;
  KalmanOptions kalman;
  AttackSpec attack;
  CodingSpec coding;
  AdversarySpec adversary;
  ScheduleSpec schedule;
  SimulationSpec simulation;
  int horizon = 200;
  double M = 2.0;
  Seeds seeds;
  std::string base_dir;  // relative attack files resolve against this
  json raw;
};

// Validates structure and rejects unknown keys (ConfigInvalid names the key).
Scenario parse_scenario(const json& j, const std::string& base_dir = ".");
Scenario load_scenario(const std::string& path);

struct RunReport {
  std::vector<std::string> files;
  json summary;
};

RunReport run_scenario(const Scenario& scenario, const std::string& out_dir);
RunReport run_scenario_file(const std::string& path, const std::string& out_dir);

std::vector<std::string> figure_ids();
std::string scenario_dir();
// Runs the bundled scenario for a figure into out_dir/<figure>. UnknownFigure
// for ids outside figure_ids().
RunReport reproduce(const std::string& figure, const std::string& out_dir);

std::uint64_t config_hash(const json& j);

// "%.12e" formatting used by every CSV.
std::string format_number(double x);

}  // namespace cpscoding
