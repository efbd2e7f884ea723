#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "cpscoding/adversary.hpp"
#include "cpscoding/attack.hpp"
#include "cpscoding/coding.hpp"
#include "cpscoding/error.hpp"
#include "cpscoding/scenario.hpp"
#include "cpscoding/scheduler.hpp"
#include "cpscoding/serialization.hpp"

namespace fs = std::filesystem;
using namespace cpscoding;

namespace {

struct Globals {
  std::string out = "out";
  std::optional<std::uint64_t> seed;
  bool quiet = false;
};

struct Context {
  Scenario sc;
  LinearSystem sys;
  KalmanDesign design;
};

Context load(const std::string& path, const Globals& g) {
  Scenario sc = load_scenario(path);
  if (g.seed) sc.seeds.plant = *g.seed;
  LinearSystem sys = make_system(sc.system.A, sc.system.B, sc.system.C, sc.system.Q, sc.system.R);
  KalmanDesign design = steady_state_kalman(sys, sc.kalman);
  return {std::move(sc), std::move(sys), std::move(design)};
}

void emit(const Globals& g, const std::string& file, const json& j) {
  fs::create_directories(g.out);
  const fs::path p = fs::path(g.out) / file;
  write_json_file(p.string(), j);
  if (!g.quiet) std::cout << j.dump(2) << "\n";
}

std::vector<Vector> real_unstable(const LinearSystem& sys) {
  std::vector<Vector> out;
  for (const auto& p : unstable_eigenpairs(sys)) {
    if (p.is_real()) out.push_back(p.real_vector());
  }
  return out;
}

CodingMatrix coding_for(const Context& c, std::uint64_t seed) {
  if (c.sc.coding.kind == CodingKind::Manual) {
    Matrix s = c.sc.coding.sigma;
    if (c.sc.coding.scale != 1.0) s *= c.sc.coding.scale;
    return CodingMatrix::manual(std::move(s));
  }
  Alg1Options o;
  o.scale = c.sc.coding.scale;
  return alg1_coding_matrix(c.sys, real_unstable(c.sys), seed, o);
}

AttackSequence sensor_attack_for(const Context& c, double budget) {
  const StealthVerdict v = stealth_feasible(c.sys, c.design);
  if (!v.feasible) fail(ErrorKind::InvalidArgument, "no stealthy sensor attack: " + v.reason);
  return synth_sensor_attack(c.sys, c.design, v.pairs.at(static_cast<std::size_t>(c.sc.attack.eigen_index)),
                             budget, c.sc.horizon);
}

PipelineConfig pipeline_for(const Scenario& sc) {
  PipelineConfig pc;
  pc.M = sc.M;
  pc.horizon = sc.horizon;
  pc.estimator = sc.adversary.estimator;
  pc.recording.seed = sc.seeds.plant;
  pc.recording.input_seed = sc.seeds.input;
  pc.recording.input_sigma = sc.adversary.input_sigma;
  pc.alg2.epsilon = sc.adversary.epsilon;
  pc.alg2.rank_tol = sc.adversary.rank_tol;
  pc.alg2.als.max_iter = sc.adversary.max_iter;
  pc.alg2.als.tol = sc.adversary.tol;
  pc.alg2.als.nstarts = sc.adversary.nstarts;
  pc.alg2.als.seed = sc.seeds.solver;
  return pc;
}

json estimate_json(const EstimateResult& r) {
  json j;
  j["sigma_hat"] = to_json(r.sigma_hat);
  j["x0_hat"] = to_json(r.x0_hat);
  j["cost"] = r.cost;
  j["full_rank"] = r.full_rank;
  j["iterations"] = r.iterations;
  j["observations"] = r.observations;
  j["degenerate"] = r.degenerate;
  return j;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Stealthy injection attacks and sensor coding for Kalman-filtered LTI plants"};
  app.require_subcommand(1);
  Globals g;
  app.add_option("--out", g.out, "Output directory")->capture_default_str();
  app.add_option("--seed", g.seed, "Override the plant noise seed");
  app.add_flag("--quiet", g.quiet, "Only write files");

  std::string config;
  auto* riccati = app.add_subcommand("riccati", "Steady-state Kalman design of a scenario's plant");
  riccati->add_option("config", config, "Scenario JSON")->required()->check(CLI::ExistingFile);

  auto* simulate_cmd = app.add_subcommand("simulate", "Noisy closed-loop run with the chi-square detector");
  simulate_cmd->add_option("config", config, "Scenario JSON")->required()->check(CLI::ExistingFile);

  double budget = 0.0;
  auto* synth = app.add_subcommand("attack-synth", "Synthesize the scenario's attack");
  synth->add_option("config", config, "Scenario JSON")->required()->check(CLI::ExistingFile);
  synth->add_option("--budget", budget, "Design budget (default: attack.budget or M)");

  std::uint64_t coding_seed = 0;
  bool coding_seed_set = false;
  auto* gen = app.add_subcommand("coding-gen", "Generate a Givens coding matrix");
  gen->add_option("config", config, "Scenario JSON")->required()->check(CLI::ExistingFile);
  gen->add_option("--coding-seed", coding_seed, "Rotation draw seed")->each([&](const std::string&) { coding_seed_set = true; });
  double gen_scale = 1.0;
  gen->add_option("--scale", gen_scale, "Uniform scale factor")->capture_default_str();

  std::string sigma_file;
  auto* check = app.add_subcommand("coding-check", "Feasibility checks of a coding matrix");
  check->add_option("config", config, "Scenario JSON")->required()->check(CLI::ExistingFile);
  check->add_option("--sigma", sigma_file, "Coding matrix JSON (default: the scenario's)")->check(CLI::ExistingFile);

  std::string log_file;
  int record_N = 20;
  auto* est = app.add_subcommand("estimate", "Attacker-side estimate of the coding matrix");
  est->add_option("config", config, "Scenario JSON")->required()->check(CLI::ExistingFile);
  est->add_option("--log", log_file, "Measurement CSV (k,Y..,u..); recorded from the scenario if absent")->check(CLI::ExistingFile);
  est->add_option("-N", record_N, "Steps to record when no log is given")->capture_default_str();

  auto* sched = app.add_subcommand("schedule", "Choose the coding refresh interval");
  sched->add_option("config", config, "Scenario JSON")->required()->check(CLI::ExistingFile);

  auto* run = app.add_subcommand("run", "Run every stage declared in a scenario");
  run->add_option("config", config, "Scenario JSON")->required()->check(CLI::ExistingFile);

  std::string figure;
  bool all = false;
  auto* repro = app.add_subcommand("reproduce", "Run a bundled figure scenario");
  repro->add_option("figure", figure, "fig3 .. fig7");
  repro->add_flag("--all", all, "Every figure");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*riccati) {
      const Context c = load(config, g);
      json j = to_json(c.design);
      j["riccati_residual"] = riccati_residual(c.sys, c.design.P);
      emit(g, "design.json", j);
    } else if (*simulate_cmd) {
      Scenario sc = load_scenario(config);
      if (g.seed) sc.seeds.plant = *g.seed;
      sc.simulation.enabled = true;
      sc.adversary.enabled = false;
      sc.schedule.enabled = false;
      const RunReport r = run_scenario(sc, g.out);
      if (!g.quiet) std::cout << r.summary["simulation"].dump(2) << "\n";
    } else if (*synth) {
      const Context c = load(config, g);
      const double b = budget > 0 ? budget : c.sc.attack.budget.value_or(c.sc.M);
      AttackSequence a;
      if (c.sc.attack.kind == AttackKind::Combined) {
        CombinedAttackOptions o;
        o.u_bound = c.sc.attack.u_bound;
        o.M = b;
        o.T = c.sc.horizon;
        o.seed = c.sc.seeds.solver;
        o.eps_bound = c.sc.attack.eps_bound;
        a = synth_combined_attack(c.sys, c.design, o);
      } else {
        a = sensor_attack_for(c, b);
      }
      fs::create_directories(g.out);
      write_json_file((fs::path(g.out) / "attack.json").string(), to_json(a));
      if (!g.quiet) {
        const DifferenceTrace t = difference_dynamics(c.sys, c.design, a, c.sc.horizon);
        std::cout << "max |dz| " << max_norm(t.dz) << ", |de_T| " << t.de.back().norm() << "\n";
      }
    } else if (*gen) {
      const Context c = load(config, g);
      Alg1Options o;
      o.scale = gen_scale;
      const std::uint64_t seed = coding_seed_set ? coding_seed : c.sc.seeds.coding;
      const CodingMatrix cm = alg1_coding_matrix(c.sys, real_unstable(c.sys), seed, o);
      json j = to_json(cm);
      j["feasible_multi"] = check_feasible_multi(cm.sigma(), c.sys.C, real_unstable(c.sys));
      emit(g, "coding.json", j);
    } else if (*check) {
      const Context c = load(config, g);
      const CodingMatrix cm = sigma_file.empty() ? coding_for(c, c.sc.seeds.coding)
                                                 : coding_from_json(read_json_file(sigma_file));
      const auto vs = real_unstable(c.sys);
      json j;
      j["sigma"] = to_json(cm.sigma());
      j["single"] = json::array();
      for (const auto& v : vs) j["single"].push_back(check_feasible_single(cm.sigma(), c.sys.C, v));
      if (!vs.empty()) j["multi"] = check_feasible_multi(cm.sigma(), c.sys.C, vs);
      j["combined"] = check_feasible_combined(cm.sigma());
      emit(g, "coding_check.json", j);
    } else if (*est) {
      const Context c = load(config, g);
      MeasurementLog log;
      if (!log_file.empty()) {
        std::ifstream f(log_file);
        log = MeasurementLog::read_csv(f);
      } else {
        RecordingOptions rec;
        rec.length = record_N + 1;
        rec.seed = c.sc.seeds.plant;
        rec.input_seed = c.sc.seeds.input;
        rec.input_sigma = c.sc.adversary.input_sigma;
        log = record_coded_traffic(c.sys, coding_for(c, c.sc.seeds.coding), rec);
        fs::create_directories(g.out);
        std::ofstream f(fs::path(g.out) / "log.csv");
        log.write_csv(f);
      }
      const PipelineConfig pc = pipeline_for(c.sc);
      json j;
      try {
        j = estimate_json(alg2_estimate(c.sys.A, c.sys.B, c.sys.C, log, pc.alg2));
        j["status"] = "converged";
      } catch (const ExhaustedError& e) {
        j = estimate_json(e.last());
        j["status"] = "exhausted";
      }
      const BilinearProblem pr = build_bilinear(c.sys.A, c.sys.B, c.sys.C, log);
      AlsOptions als = pc.alg2.als;
      als.rank_tol = pc.alg2.rank_tol;
      j["full_log"] = estimate_json(solve_bilinear_als(pr, Matrix::Identity(c.sys.p(), c.sys.p()),
                                                       Vector::Zero(c.sys.n()), als));
      emit(g, "estimate.json", j);
    } else if (*sched) {
      const Context c = load(config, g);
      if (!c.sc.schedule.enabled) fail(ErrorKind::ConfigInvalid, "schedule: section missing");
      ScheduleConfig cfg;
      cfg.pipeline = pipeline_for(c.sc);
      cfg.max_N = c.sc.schedule.max_N;
      const CodingMatrix cm = coding_for(c, c.sc.seeds.coding);
      const AttackSequence base = sensor_attack_for(c, c.sc.attack.budget.value_or(c.sc.M));
      json j;
      try {
        j["N_sigma"] = alg3_schedule(c.sys, c.design, cm, base, c.sc.schedule.t_s,
                                     c.sc.schedule.threshold, cfg);
      } catch (const Error& e) {
        if (e.kind() != ErrorKind::HorizonExhausted) throw;
        j["N_sigma"] = "exhausted";
      }
      emit(g, "schedule.json", j);
    } else if (*run) {
      Scenario sc = load_scenario(config);
      if (g.seed) sc.seeds.plant = *g.seed;
      const RunReport r = run_scenario(sc, g.out);
      if (!g.quiet) for (const auto& f : r.files) std::cout << f << "\n";
    } else if (*repro) {
      std::vector<std::string> figs;
      if (all) figs = figure_ids();
      else if (!figure.empty()) figs = {figure};
      else fail(ErrorKind::InvalidArgument, "name a figure or pass --all");
      for (const auto& f : figs) {
        const RunReport r = reproduce(f, g.out);
        if (!g.quiet) std::cout << f << ": " << r.files.size() << " files in " << (fs::path(g.out) / f).string() << "\n";
      }
    }
  } catch (const Error& e) {
    std::cerr << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
