#include "cpscoding/scenario.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

#include "cpscoding/adversary.hpp"
#include "cpscoding/error.hpp"

namespace cpscoding {

namespace fs = std::filesystem;

std::string format_number(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.12e", x);
  return buf;
}

std::uint64_t config_hash(const json& j) {
  // FNV-1a over the canonical dump (object keys are sorted by nlohmann).
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : j.dump()) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

namespace {

// ---- parsing -------------------------------------------------------------

void check_keys(const json& obj, const std::string& path,
                const std::set<std::string>& allowed) {
  if (!obj.is_object()) fail(ErrorKind::ConfigInvalid, path + ": expected an object");
  for (const auto& [key, _] : obj.items()) {
    if (!allowed.count(key)) {
      fail(ErrorKind::ConfigInvalid,
           "unknown key '" + (path.empty() ? key : path + "." + key) + "'");
    }
  }
}

template <class T>
T get(const json& obj, const std::string& key, const std::string& path, T fallback) {
  if (!obj.contains(key)) return fallback;
  try {
    return obj.at(key).get<T>();
  } catch (const json::exception&) {
    fail(ErrorKind::ConfigInvalid, path + "." + key + ": wrong type");
  }
}

const json& require(const json& obj, const std::string& key, const std::string& path) {
  if (!obj.contains(key)) fail(ErrorKind::ConfigInvalid, path + "." + key + ": missing");
  return obj.at(key);
}

std::uint64_t get_seed(const json& obj, const std::string& key, std::uint64_t fallback) {
  if (!obj.contains(key)) return fallback;
  const json& v = obj.at(key);
  if (!v.is_number_unsigned()) {
    fail(ErrorKind::ConfigInvalid, "seeds." + key + ": expected a non-negative integer");
  }
  return v.get<std::uint64_t>();
}

SystemSpec parse_system(const json& j) {
  check_keys(j, "system", {"A", "B", "C", "Q", "R", "x0", "feedback"});
  SystemSpec s;
  s.A = matrix_from_json(require(j, "A", "system"), "system.A");
  s.B = matrix_from_json(require(j, "B", "system"), "system.B");
  s.C = matrix_from_json(require(j, "C", "system"), "system.C");
  const auto n = s.A.rows();
  const auto p = s.C.rows();
  s.Q = j.contains("Q") ? matrix_from_json(j.at("Q"), "system.Q") : Matrix(0.01 * Matrix::Identity(n, n));
  s.R = j.contains("R") ? matrix_from_json(j.at("R"), "system.R") : Matrix(0.01 * Matrix::Identity(p, p));
  if (j.contains("x0")) s.x0 = vector_from_json(j.at("x0"), "system.x0");
  if (j.contains("feedback")) s.feedback = matrix_from_json(j.at("feedback"), "system.feedback");
  return s;
}

KalmanOptions parse_kalman(const json& j) {
  check_keys(j, "kalman", {"tol", "max_iter", "confidence", "mode", "theta"});
  KalmanOptions k;
  k.tol = get(j, "tol", "kalman", k.tol);
  k.max_iter = get(j, "max_iter", "kalman", k.max_iter);
  k.confidence = get(j, "confidence", "kalman", k.confidence);
  const std::string mode = get<std::string>(j, "mode", "kalman", "innovation_cov");
  if (mode == "innovation_cov") k.mode = DetectorMode::InnovationCov;
  else if (mode == "state_cov") k.mode = DetectorMode::StateCov;
  else fail(ErrorKind::ConfigInvalid, "kalman.mode: unknown value '" + mode + "'");
  if (j.contains("theta")) k.theta = matrix_from_json(j.at("theta"), "kalman.theta");
  return k;
}

AttackSpec parse_attack(const json& j) {
  check_keys(j, "attack", {"type", "budget", "eigen_index", "u_bound", "eps_bound", "file", "y0", "y1"});
  AttackSpec a;
  const std::string type = get<std::string>(j, "type", "attack", "none");
  if (type == "none") a.kind = AttackKind::None;
  else if (type == "sensor") a.kind = AttackKind::Sensor;
  else if (type == "combined") a.kind = AttackKind::Combined;
  else if (type == "external") a.kind = AttackKind::External;
  else if (type == "recursion") a.kind = AttackKind::Recursion;
  else fail(ErrorKind::ConfigInvalid, "attack.type: unknown value '" + type + "'");
  if (j.contains("budget")) a.budget = get(j, "budget", "attack", 0.0);
  a.eigen_index = get(j, "eigen_index", "attack", 0);
  a.u_bound = get(j, "u_bound", "attack", a.u_bound);
  a.eps_bound = get(j, "eps_bound", "attack", a.eps_bound);
  a.file = get<std::string>(j, "file", "attack", "");
  if (a.kind == AttackKind::External && a.file.empty()) {
    fail(ErrorKind::ConfigInvalid, "attack.file: missing for an external attack");
  }
  if (a.kind == AttackKind::Recursion) {
    a.y0 = vector_from_json(require(j, "y0", "attack"), "attack.y0");
    a.y1 = vector_from_json(require(j, "y1", "attack"), "attack.y1");
  }
  return a;
}

CodingSpec parse_coding(const json& j) {
  check_keys(j, "coding", {"type", "sigma", "scale", "gain"});
  CodingSpec c;
  const std::string type = get<std::string>(j, "type", "coding", "none");
  if (type == "none") c.kind = CodingKind::None;
  else if (type == "manual") c.kind = CodingKind::Manual;
  else if (type == "algorithm1") c.kind = CodingKind::Algorithm1;
  else fail(ErrorKind::ConfigInvalid, "coding.type: unknown value '" + type + "'");
  if (c.kind == CodingKind::Manual) c.sigma = matrix_from_json(require(j, "sigma", "coding"), "coding.sigma");
  c.scale = get(j, "scale", "coding", c.scale);
  const std::string gain = get<std::string>(j, "gain", "coding", "decoded");
  if (gain == "decoded") c.gain = GainMode::Decoded;
  else if (gain == "redesigned") c.gain = GainMode::Redesigned;
  else fail(ErrorKind::ConfigInvalid, "coding.gain: unknown value '" + gain + "'");
  return c;
}

AdversarySpec parse_adversary(const json& j) {
  check_keys(j, "adversary", {"N", "epsilon", "rank_tol", "nstarts", "max_iter", "tol",
                              "input_sigma", "estimator"});
  AdversarySpec a;
  a.enabled = true;
  const json& N = require(j, "N", "adversary");
  if (N.is_number_integer()) {
    a.Ns = {N.get<int>()};
  } else if (N.is_array() && !N.empty()) {
    for (const auto& v : N) {
      if (!v.is_number_integer()) fail(ErrorKind::ConfigInvalid, "adversary.N: expected integers");
      a.Ns.push_back(v.get<int>());
    }
  } else {
    fail(ErrorKind::ConfigInvalid, "adversary.N: expected an integer or a list of integers");
  }
  for (int n : a.Ns) {
    if (n < 0) fail(ErrorKind::ConfigInvalid, "adversary.N: must be non-negative");
  }
  if (j.contains("epsilon") && j.at("epsilon").is_string() && j.at("epsilon") == "inf") {
    a.epsilon = std::numeric_limits<double>::infinity();
  } else {
    a.epsilon = get(j, "epsilon", "adversary", a.epsilon);
  }
  a.rank_tol = get(j, "rank_tol", "adversary", a.rank_tol);
  a.nstarts = get(j, "nstarts", "adversary", a.nstarts);
  a.max_iter = get(j, "max_iter", "adversary", a.max_iter);
  a.tol = get(j, "tol", "adversary", a.tol);
  a.input_sigma = get(j, "input_sigma", "adversary", a.input_sigma);
  const std::string est = get<std::string>(j, "estimator", "adversary", "full_log");
  if (est == "full_log") a.estimator = EstimatorKind::FullLog;
  else if (est == "alg2") a.estimator = EstimatorKind::Alg2;
  else fail(ErrorKind::ConfigInvalid, "adversary.estimator: unknown value '" + est + "'");
  return a;
}

ScheduleSpec parse_schedule(const json& j) {
  check_keys(j, "schedule", {"t_s", "threshold", "max_N"});
  ScheduleSpec s;
  s.enabled = true;
  s.t_s = get(j, "t_s", "schedule", s.t_s);
  s.threshold = get(j, "threshold", "schedule", s.threshold);
  s.max_N = get(j, "max_N", "schedule", s.max_N);
  if (s.t_s < 1) fail(ErrorKind::ConfigInvalid, "schedule.t_s: must be >= 1");
  return s;
}

SimulationSpec parse_simulation(const json& j) {
  check_keys(j, "simulation", {"enabled", "horizon", "noise_free"});
  SimulationSpec s;
  s.enabled = get(j, "enabled", "simulation", true);
  s.horizon = get(j, "horizon", "simulation", 0);
  s.noise_free = get(j, "noise_free", "simulation", false);
  return s;
}

// ---- output --------------------------------------------------------------

class Csv {
 public:
  Csv(const fs::path& path, const std::vector<std::string>& header)
      : path_(path), header_(header), out_(path) {
    if (!out_) fail(ErrorKind::IoError, "cannot write " + path.string());
    for (std::size_t i = 0; i < header.size(); ++i) out_ << (i ? "," : "") << header[i];
    out_ << "\n";
  }

  void row(int k, const std::vector<double>& values) {
    out_ << k;
    for (std::size_t i = 0; i < values.size(); ++i) {
      // flag columns are written as 0/1
      if (i + 1 < header_.size() && header_[i + 1].rfind("alarm", 0) == 0) {
        out_ << "," << (values[i] != 0.0 ? 1 : 0);
      } else {
        out_ << "," << format_number(values[i]);
      }
    }
    out_ << "\n";
  }

  std::string path() const { return path_.string(); }

 private:
  fs::path path_;
  std::vector<std::string> header_;
  std::ofstream out_;
};

template <class F>
auto stage(const char* name, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const Error& e) {
    throw Error(e.kind(), std::string("stage '") + name + "': " + e.detail());
  }
}

json pair_json(const EigenPair& p) {
  json j;
  j["lambda"] = p.real_lambda();
  j["v"] = to_json(p.real_vector());
  return j;
}

json optional_int(std::optional<int> v) {
  return v ? json(*v) : json("never");
}

json noisy_run(const LinearSystem& sys, const KalmanDesign& design, const Scenario& sc,
               const AttackSequence* attack, const CodingMatrix* coding,
               const fs::path& path, RunReport& report) {
  const int T = sc.simulation.horizon > 0 ? sc.simulation.horizon : sc.horizon;
  KalmanObserver obs(sys, design);
  SimulationOptions so;
  so.seed = sc.seeds.plant;
  so.horizon = T;
  so.x0 = sc.system.x0;
  so.noise_free = sc.simulation.noise_free;
  so.observer = &obs;
  if (coding) so.channel = coding->channel();
  const ControlLaw law = sc.system.feedback ? state_feedback(*sc.system.feedback) : zero_law(sys.m());
  const Trajectory tr = attack ? simulate_attacked(sys, law, *attack, so) : simulate(sys, law, so);
  const ResidueTrace rt = residue_trace(design, tr.residuals);

  Csv csv(path, {"k", "x_norm", "y_norm", "g", "alarm"});
  int alarms = 0;
  for (int k = 0; k <= T; ++k) {
    const double g = rt.g[static_cast<std::size_t>(k)];
    const bool alarm = g > design.alpha;
    alarms += alarm;
    csv.row(k, {tr.states[static_cast<std::size_t>(k)].norm(),
                tr.outputs[static_cast<std::size_t>(k)].norm(), g, alarm ? 1.0 : 0.0});
  }
  report.files.push_back(csv.path());
  json j;
  j["horizon"] = T;
  j["alarm_count"] = alarms;
  j["alarm_rate"] = static_cast<double>(alarms) / (T + 1);
  j["first_alarm"] = optional_int(rt.alarm_time);
  return j;
}

}  // namespace

Scenario parse_scenario(const json& j, const std::string& base_dir) {
  check_keys(j, "", {"name", "description", "system", "kalman", "attack", "coding", "adversary",
                     "schedule", "simulation", "horizon", "M", "seeds"});
  Scenario s;
  s.raw = j;
  s.base_dir = base_dir;
  s.name = get<std::string>(j, "name", "", "scenario");
  s.description = get<std::string>(j, "description", "", "");
  s.system = parse_system(require(j, "system", ""));
  if (j.contains("kalman")) s.kalman = parse_kalman(j.at("kalman"));
  if (j.contains("attack")) s.attack = parse_attack(j.at("attack"));
  if (j.contains("coding")) s.coding = parse_coding(j.at("coding"));
  if (j.contains("adversary")) s.adversary = parse_adversary(j.at("adversary"));
  if (j.contains("schedule")) s.schedule = parse_schedule(j.at("schedule"));
  if (j.contains("simulation")) {
    s.simulation = parse_simulation(j.at("simulation"));
  } else {
    s.simulation.enabled = s.attack.kind == AttackKind::None;
  }
  s.horizon = get(j, "horizon", "", s.horizon);
  s.M = get(j, "M", "", s.M);
  if (s.horizon < 1) fail(ErrorKind::ConfigInvalid, "horizon: must be >= 1");
  if (!(s.M > 0.0)) fail(ErrorKind::ConfigInvalid, "M: must be positive");
  if (j.contains("seeds")) {
    const json& sd = j.at("seeds");
    check_keys(sd, "seeds", {"plant", "coding", "solver", "input"});
    s.seeds.plant = get_seed(sd, "plant", s.seeds.plant);
    s.seeds.coding = get_seed(sd, "coding", s.seeds.coding);
    s.seeds.solver = get_seed(sd, "solver", s.seeds.solver);
    s.seeds.input = get_seed(sd, "input", s.seeds.input);
  }
  if ((s.adversary.enabled || s.schedule.enabled) && s.coding.kind == CodingKind::None) {
    fail(ErrorKind::ConfigInvalid, "adversary: needs a coding section");
  }
  if (s.schedule.enabled && s.attack.kind == AttackKind::None) {
    fail(ErrorKind::ConfigInvalid, "schedule: needs an attack section");
  }
  if (s.adversary.enabled && s.attack.kind == AttackKind::None) {
    fail(ErrorKind::ConfigInvalid, "adversary: needs an attack section");
  }
  return s;
}

Scenario load_scenario(const std::string& path) {
  const json j = read_json_file(path);
  return parse_scenario(j, fs::path(path).parent_path().string());
}

RunReport run_scenario(const Scenario& sc, const std::string& out_dir) {
  RunReport report;
  const fs::path out(out_dir);
  std::error_code ec;
  fs::create_directories(out, ec);
  if (ec) fail(ErrorKind::IoError, "cannot create " + out.string());

  json summary;
  summary["name"] = sc.name;
  summary["version"] = kVersion;
  {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(config_hash(sc.raw)));
    summary["config_hash"] = buf;
  }
  summary["seeds"] = {{"plant", sc.seeds.plant}, {"coding", sc.seeds.coding},
                      {"solver", sc.seeds.solver}, {"input", sc.seeds.input}};
  summary["horizon"] = sc.horizon;
  summary["M"] = sc.M;

  const LinearSystem sys = stage("system", [&] {
    return make_system(sc.system.A, sc.system.B, sc.system.C, sc.system.Q, sc.system.R);
  });
  const KalmanDesign design = stage("kalman", [&] { return steady_state_kalman(sys, sc.kalman); });
  summary["kalman"] = to_json(design);
  summary["kalman"]["riccati_residual"] = riccati_residual(sys, design.P);

  // Stealth feasibility of the uncoded plant.
  StealthVerdict verdict;
  std::vector<Vector> eigvecs;
  stage("feasibility", [&] {
    json f;
    try {
      verdict = stealth_feasible(sys, design);
      f["feasible"] = verdict.feasible;
      f["pairs"] = json::array();
      for (const auto& p : verdict.pairs) f["pairs"].push_back(pair_json(p));
      if (!verdict.feasible) f["reason"] = verdict.reason;
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::UnsupportedSpectrum) throw;
      f["feasible"] = false;
      f["reason"] = e.detail();
    }
    for (const auto& p : unstable_eigenpairs(sys)) {
      if (p.is_real()) eigvecs.push_back(p.real_vector());
    }
    summary["stealth"] = f;
    return 0;
  });

  std::optional<CodingMatrix> coding;
  if (sc.coding.kind != CodingKind::None) {
    coding = stage("coding", [&] {
      if (sc.coding.kind == CodingKind::Manual) {
        Matrix s = sc.coding.sigma;
        if (sc.coding.scale != 1.0) s *= sc.coding.scale;
        return CodingMatrix::manual(std::move(s));
      }
      if (eigvecs.empty()) fail(ErrorKind::ZeroSubspace, "A has no real unstable eigenvector");
      Alg1Options o;
      o.scale = sc.coding.scale;
      return alg1_coding_matrix(sys, eigvecs, sc.seeds.coding, o);
    });
    json cj = to_json(*coding);
    json checks;
    checks["single"] = json::array();
    for (const auto& v : eigvecs) {
      try {
        checks["single"].push_back(check_feasible_single(coding->sigma(), sys.C, v));
      } catch (const Error& e) {
        if (e.kind() != ErrorKind::ZeroVector) throw;
        checks["single"].push_back("zero C v");
      }
    }
    if (!eigvecs.empty()) {
      try {
        checks["multi"] = check_feasible_multi(coding->sigma(), sys.C, eigvecs);
      } catch (const Error& e) {
        if (e.kind() != ErrorKind::ZeroSubspace) throw;
        checks["multi"] = "zero subspace";
      }
    }
    checks["combined"] = check_feasible_combined(coding->sigma());
    cj["checks"] = checks;
    summary["coding"] = cj;
  }
  const CodingMatrix* cptr = coding ? &*coding : nullptr;

  std::optional<AttackSequence> attack;
  if (sc.attack.kind != AttackKind::None) {
    attack = stage("attack", [&]() -> AttackSequence {
      const double budget = sc.attack.budget.value_or(sc.M);
      switch (sc.attack.kind) {
        case AttackKind::Sensor: {
          if (!verdict.feasible) fail(ErrorKind::InvalidArgument, "no stealthy sensor attack exists");
          if (sc.attack.eigen_index < 0 ||
              sc.attack.eigen_index >= static_cast<int>(verdict.pairs.size())) {
            fail(ErrorKind::IndexOutOfRange, "attack.eigen_index out of range");
          }
          return synth_sensor_attack(sys, design,
                                     verdict.pairs[static_cast<std::size_t>(sc.attack.eigen_index)],
                                     budget, sc.horizon);
        }
        case AttackKind::Combined: {
          CombinedAttackOptions o;
          o.u_bound = sc.attack.u_bound;
          o.M = budget;
          o.T = sc.horizon;
          o.seed = sc.seeds.solver;
          o.eps_bound = sc.attack.eps_bound;
          return synth_combined_attack(sys, design, o);
        }
        case AttackKind::External: {
          fs::path f(sc.attack.file);
          if (f.is_relative()) f = fs::path(sc.base_dir) / f;
          AttackSequence a = attack_from_json(read_json_file(f.string()));
          if (a.budget == 0.0) a.budget = budget;
          return a;
        }
        case AttackKind::Recursion: {
          AttackSequence a = alternating_recursion_attack(sc.attack.y0, sc.attack.y1, sys.m(), sc.horizon);
          a.budget = budget;
          return a;
        }
        case AttackKind::None: break;
      }
      fail(ErrorKind::ConfigInvalid, "attack.type: none");
    });
    const fs::path ap = out / "attack.json";
    write_json_file(ap.string(), to_json(*attack));
    report.files.push_back(ap.string());

    stage("difference", [&] {
      const DifferenceTrace base = difference_dynamics(sys, design, *attack, sc.horizon);
      std::optional<DifferenceTrace> coded;
      if (cptr) coded = difference_dynamics(sys, design, *attack, sc.horizon, cptr, sc.coding.gain);
      std::vector<std::string> header = {"k", "de_norm", "dz_norm", "alarm"};
      if (coded) {
        for (const char* c : {"de_coded_norm", "dz_coded_norm", "alarm_coded"}) header.push_back(c);
      }
      Csv csv(out / "traces.csv", header);
      for (int k = 0; k <= sc.horizon; ++k) {
        const double de = base.de[static_cast<std::size_t>(k)].norm();
        const double dz = base.dz[static_cast<std::size_t>(k)].norm();
        std::vector<double> row = {de, dz, dz > sc.M ? 1.0 : 0.0};
        if (coded) {
          const double dzc = coded->dz[static_cast<std::size_t>(k)].norm();
          row.push_back(coded->de[static_cast<std::size_t>(k)].norm());
          row.push_back(dzc);
          row.push_back(dzc > sc.M ? 1.0 : 0.0);
        }
        csv.row(k, row);
      }
      report.files.push_back(csv.path());
      json a;
      a["origin"] = attack->meta.origin;
      a["budget"] = attack->budget;
      if (attack->meta.scale) a["scale"] = *attack->meta.scale;
      a["max_dz"] = max_norm(base.dz);
      a["final_de"] = base.de.back().norm();
      a["T_s"] = optional_int(stealth_time(base, sc.M));
      if (coded) {
        a["max_dz_coded"] = max_norm(coded->dz);
        a["final_dz_coded"] = coded->dz.back().norm();
        a["final_de_coded"] = coded->de.back().norm();
        a["T_s_coded"] = optional_int(stealth_time(*coded, sc.M));
      }
      summary["attack"] = a;
      return 0;
    });
  }

  if (sc.simulation.enabled) {
    stage("simulation", [&] {
      json s;
      s["nominal"] = noisy_run(sys, design, sc, nullptr, cptr, out / "nominal.csv", report);
      if (attack) s["attacked"] = noisy_run(sys, design, sc, &*attack, cptr, out / "attacked.csv", report);
      summary["simulation"] = s;
      return 0;
    });
  }

  PipelineConfig pc;
  pc.M = sc.M;
  pc.horizon = sc.horizon;
  pc.estimator = sc.adversary.estimator;
  pc.recording.seed = sc.seeds.plant;
  pc.recording.input_seed = sc.seeds.input;
  pc.recording.input_sigma = sc.adversary.input_sigma;
  pc.alg2.epsilon = sc.adversary.epsilon;
  pc.alg2.rank_tol = sc.adversary.rank_tol;
  pc.alg2.als.tol = sc.adversary.tol;
  pc.alg2.als.max_iter = sc.adversary.max_iter;
  pc.alg2.als.nstarts = sc.adversary.nstarts;
  pc.alg2.als.seed = sc.seeds.solver;

  if (sc.adversary.enabled) {
    stage("adversary", [&] {
      const StealthReport rep = stealth_report(sys, design, *coding, *attack, sc.adversary.Ns, pc);
      std::ofstream f(out / "stealth.csv");
      if (!f) fail(ErrorKind::IoError, "cannot write stealth.csv");
      rep.write_csv(f);
      report.files.push_back((out / "stealth.csv").string());

      const DifferenceTrace uncoded = difference_dynamics(sys, design, *attack, sc.horizon);
      const DifferenceTrace coded = difference_dynamics(sys, design, *attack, sc.horizon, cptr);
      std::vector<DifferenceTrace> adapted;
      std::vector<std::string> header = {"k", "dz_uncoded", "dz_coded"};
      for (const auto& [N, sh] : rep.sigma_hat) {
        adapted.push_back(difference_dynamics(sys, design, adapt_attack(sh, *attack), sc.horizon, cptr));
        header.push_back("dz_adapted_N" + std::to_string(N));
      }
      Csv csv(out / "adapted.csv", header);
      for (int k = 0; k <= sc.horizon; ++k) {
        std::vector<double> row = {uncoded.dz[static_cast<std::size_t>(k)].norm(),
                                   coded.dz[static_cast<std::size_t>(k)].norm()};
        for (const auto& t : adapted) row.push_back(t.dz[static_cast<std::size_t>(k)].norm());
        csv.row(k, row);
      }
      report.files.push_back(csv.path());

      json a;
      a["T_s_base"] = optional_int(rep.ts_base);
      a["estimator"] = sc.adversary.estimator == EstimatorKind::FullLog ? "full_log" : "alg2";
      a["table"] = json::array();
      for (const auto& [N, ts] : rep.ts_adapted) {
        json row;
        row["N"] = N;
        row["T_s"] = optional_int(ts);
        row["alpha"] = rep.alpha_of_N.at(N);
        row["sigma_hat"] = to_json(rep.sigma_hat.at(N));
        a["table"].push_back(row);
      }
      summary["adversary"] = a;
      return 0;
    });
  }

  if (sc.schedule.enabled) {
    stage("schedule", [&] {
      ScheduleConfig cfg;
      cfg.pipeline = pc;
      cfg.max_N = sc.schedule.max_N;
      json s;
      s["t_s"] = sc.schedule.t_s;
      s["threshold"] = sc.schedule.threshold;
      try {
        s["N_sigma"] = alg3_schedule(sys, design, *coding, *attack, sc.schedule.t_s,
                                     sc.schedule.threshold, cfg);
      } catch (const Error& e) {
        if (e.kind() != ErrorKind::HorizonExhausted) throw;
        s["N_sigma"] = "exhausted";
        s["detail"] = e.detail();
      }
      summary["schedule"] = s;
      return 0;
    });
  }

  const fs::path sp = out / "summary.json";
  write_json_file(sp.string(), summary);
  report.files.push_back(sp.string());
  report.summary = std::move(summary);
  return report;
}

RunReport run_scenario_file(const std::string& path, const std::string& out_dir) {
  return run_scenario(load_scenario(path), out_dir);
}

std::vector<std::string> figure_ids() { return {"fig3", "fig4", "fig5", "fig6", "fig7"}; }

std::string scenario_dir() {
  if (const char* env = std::getenv("CPSCODING_SCENARIOS")) return env;
  return CPSCODING_SCENARIO_DIR;
}

RunReport reproduce(const std::string& figure, const std::string& out_dir) {
  const auto ids = figure_ids();
  if (std::find(ids.begin(), ids.end(), figure) == ids.end()) {
    fail(ErrorKind::UnknownFigure, "no bundled scenario for '" + figure + "'");
  }
  const fs::path path = fs::path(scenario_dir()) / (figure + ".json");
  return run_scenario_file(path.string(), (fs::path(out_dir) / figure).string());
}

}  // namespace cpscoding
