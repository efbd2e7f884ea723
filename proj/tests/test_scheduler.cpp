#include <doctest.h>

#include <map>
#include <sstream>

#include "cpscoding/adversary.hpp"
#include "cpscoding/error.hpp"
#include "cpscoding/scheduler.hpp"
#include "fixtures.hpp"

using namespace cpscoding;

namespace {

DifferenceTrace trace_of(const std::vector<double>& norms) {
  DifferenceTrace t;
  for (double x : norms) {
    t.dz.push_back(Vector::Constant(1, x));
    t.de.push_back(Vector::Zero(1));
  }
  return t;
}

PipelineConfig small_pipeline() {
  PipelineConfig pc;
  pc.horizon = 300;
  return pc;
}

}  // namespace

TEST_CASE("stealth time is the first strict crossing") {
  CHECK(stealth_time(trace_of({0.5, 2.0, 2.5, 1.0}), 2.0).value() == 2);
  CHECK_FALSE(stealth_time(trace_of({0.5, 2.0}), 2.0).has_value());
  CHECK(censor(std::nullopt, 500) == 501.0);
  CHECK(censor(7, 500) == 7.0);
}

TEST_CASE("gain arithmetic") {
  CHECK(stealth_gain(12, 30, 500) == 1.5);
  CHECK(stealth_gain(12, 12, 500) == 0.0);
  CHECK(stealth_gain(12, 20, 500) == doctest::Approx(8.0 / 12.0));
  CHECK(stealth_gain(20, std::nullopt, 99) == 4.0);
  try {
    stealth_gain(std::nullopt, 5, 10);
    FAIL("expected BaseNeverDetected");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::BaseNeverDetected);
  }
}

TEST_CASE("schedule with an injected stealth-time map") {
  const std::map<int, int> ts = {{5, 30}, {10, 40}, {15, 51}};
  auto oracle = [&](int N) -> std::optional<int> { return ts.at(N); };
  CHECK(alg3_schedule(oracle, 12, 5, 1.5, 500, 200) == 5);
  CHECK(alg3_schedule(oracle, 12, 5, 2.0, 500, 200) == 10);
  CHECK(alg3_schedule(oracle, 12, 5, 0.0, 500, 200) == 0);
  // censored adaptation bounds alpha by (horizon + 1 - base) / base
  auto never = [](int) -> std::optional<int> { return std::nullopt; };
  CHECK(alg3_schedule(never, 10, 5, 49.0, 499, 20) == 5);
  try {
    alg3_schedule(never, 10, 5, 50.0, 499, 20);
    FAIL("expected HorizonExhausted");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::HorizonExhausted);
  }
  CHECK_THROWS_AS(alg3_schedule(oracle, 12, 0, 1.0, 500, 200), Error);
}

TEST_CASE("perfect and null adaptation bounds") {
  const auto s = fixtures::plant();
  const auto d = steady_state_kalman(s);
  const auto cm = CodingMatrix::manual(fixtures::rotation());
  const auto base = fixtures::sensor_attack(s, d, 0.5, 300);
  const auto pc = small_pipeline();
  const auto id = stealth_gain_with_estimate(s, d, cm, base, Matrix::Identity(2, 2), pc);
  CHECK(id.alpha == 0.0);
  const auto perfect = stealth_gain_with_estimate(s, d, cm, base, fixtures::rotation(), pc);
  const auto uncoded = stealth_time(difference_dynamics(s, d, base, pc.horizon), pc.M);
  CHECK(perfect.ts_adapted == uncoded);
  CHECK(perfect.alpha == stealth_gain(perfect.ts_base, uncoded, pc.horizon));
  CHECK(perfect.alpha > 0.0);
}

TEST_CASE("stealth report is consistent and reproducible") {
  const auto s = fixtures::plant();
  const auto d = steady_state_kalman(s);
  const auto cm = CodingMatrix::manual(fixtures::rotation());
  const auto base = fixtures::sensor_attack(s, d, 0.5, 300);
  const auto pc = small_pipeline();
  const auto rep = stealth_report(s, d, cm, base, {2, 5, 25}, pc);
  for (const auto& [N, ts] : rep.ts_adapted) {
    CHECK(rep.alpha_of_N.at(N) == stealth_gain(rep.ts_base, ts, pc.horizon));
  }
  std::ostringstream a, b;
  rep.write_csv(a);
  stealth_report(s, d, cm, base, {2, 5, 25}, pc).write_csv(b);
  CHECK(a.str() == b.str());
  CHECK(a.str().rfind("N,T_s,detected,alpha\n", 0) == 0);
  // the single-N loop and the shared-recording report agree
  const auto g = stealth_gain(s, d, cm, base, 5, pc);
  CHECK(g.ts_adapted == rep.ts_adapted.at(5));
}

TEST_CASE("full schedule pipeline is deterministic") {
  const auto s = fixtures::plant();
  const auto d = steady_state_kalman(s);
  const auto cm = CodingMatrix::manual(fixtures::rotation());
  const auto base = fixtures::sensor_attack(s, d, 0.5, 300);
  ScheduleConfig cfg;
  cfg.pipeline = small_pipeline();
  cfg.max_N = 60;
  int first = -1;
  try {
    first = alg3_schedule(s, d, cm, base, 5, 1.5, cfg);
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::HorizonExhausted);
  }
  int second = -1;
  try {
    second = alg3_schedule(s, d, cm, base, 5, 1.5, cfg);
  } catch (const Error&) {
  }
  CHECK(first == second);
  CHECK(alg3_schedule(s, d, cm, base, 5, 0.0, cfg) == 0);
  try {
    alg3_schedule(s, d, cm, base, 5, 1e6, cfg);
    FAIL("expected HorizonExhausted");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::HorizonExhausted);
  }
}
