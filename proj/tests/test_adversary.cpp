#include <doctest.h>

#include <sstream>

#include "cpscoding/adversary.hpp"
#include "cpscoding/error.hpp"
#include "fixtures.hpp"

using namespace cpscoding;

namespace {

// Direct recording with a non-zero initial state.
MeasurementLog manual_log(const LinearSystem& s, const Matrix& sigma, const Vector& x0, int len,
                          std::uint64_t seed, bool noise_free) {
  std::mt19937_64 rng(seed + 500);
  Series u;
  for (int k = 0; k < len; ++k) u.push_back(fixtures::gaussian(rng, s.m(), 1));
  const auto cm = CodingMatrix::manual(sigma);
  SimulationOptions o;
  o.horizon = len;
  o.seed = seed;
  o.x0 = x0;
  o.noise_free = noise_free;
  o.channel = cm.channel();
  const auto tr = simulate(s, open_loop(u), o);
  MeasurementLog log(s.p(), s.m());
  for (int k = 0; k < len; ++k) log.record(tr.transmitted[k], u[k]);
  return log;
}

}  // namespace

TEST_CASE("bilinear identity holds on noise-free logs") {
  const auto s = fixtures::plant();
  Vector x0(2);
  x0 << 0.4, -1.3;
  const auto log = manual_log(s, fixtures::rotation(), x0, 12, 3, true);
  const auto pr = build_bilinear(s.A, s.B, s.C, log);
  CHECK(pr.steps() == 12);
  CHECK(bilinear_cost(pr, fixtures::rotation(), x0) < 1e-24);
  CHECK(bilinear_cost(pr, Matrix::Identity(2, 2), x0) > 1e-3);
  for (int k = 0; k < 12; ++k) CHECK((pr.T[k] - s.C * matrix_power(s.A, k)).norm() < 1e-12);
}

TEST_CASE("bilinear residual at the truth is zero-mean under noise") {
  const auto s = fixtures::plant();
  const auto cm = CodingMatrix::manual(fixtures::rotation());
  Vector mean = Vector::Zero(2 * 6);
  const int runs = 10000;
  for (int r = 0; r < runs; ++r) {
    RecordingOptions o;
    o.length = 6;
    o.seed = static_cast<std::uint64_t>(r);
    o.input_seed = static_cast<std::uint64_t>(r) + 7;
    const auto pr = build_bilinear(s.A, s.B, s.C, record_coded_traffic(s, cm, o));
    for (int k = 0; k < 6; ++k) {
      mean.segment(2 * k, 2) += pr.observation(k) - fixtures::rotation() * pr.S[k];
    }
  }
  mean /= runs;
  // per-entry standard deviation stays below 0.5, so 5 sigma is about 0.025
  CHECK(mean.cwiseAbs().maxCoeff() < 0.025);
}

TEST_CASE("ALS cost never increases") {
  const auto s = fixtures::plant();
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto log = manual_log(s, fixtures::sigma2(), Vector::Ones(2), 15, seed, false);
    const auto pr = build_bilinear(s.A, s.B, s.C, log);
    const auto r = solve_bilinear_als(pr, Matrix::Identity(2, 2), Vector::Zero(2));
    for (std::size_t i = 1; i < r.cost_history.size(); ++i) {
      CHECK(r.cost_history[i] <= r.cost_history[i - 1] * (1.0 + 1e-12) + 1e-300);
    }
    CHECK(r.cost == doctest::Approx(bilinear_cost(pr, r.sigma_hat, r.x0_hat)));
  }
}

TEST_CASE("ALS recovers the coding matrix from clean data") {
  const auto s = fixtures::plant();
  const auto cm = CodingMatrix::manual(fixtures::rotation());
  RecordingOptions o;
  o.length = 20;
  o.noise_free = true;
  const auto pr = build_bilinear(s.A, s.B, s.C, record_coded_traffic(s, cm, o));
  AlsOptions a;
  a.max_iter = 2000;
  const auto r = solve_bilinear_als(pr, Matrix::Identity(2, 2), Vector::Zero(2), a);
  CHECK(r.cost < 1e-12);
  CHECK((r.sigma_hat - fixtures::rotation()).norm() < 1e-4);
}

TEST_CASE("sigma given x0 is the linear least-squares fit") {
  const auto s = fixtures::plant();
  const auto cm = CodingMatrix::manual(fixtures::sigma1());
  RecordingOptions o;
  o.length = 10;
  o.noise_free = true;
  const auto pr = build_bilinear(s.A, s.B, s.C, record_coded_traffic(s, cm, o));
  const auto r = solve_sigma_given_x0(pr, Vector::Zero(2));
  CHECK((r.sigma_hat - fixtures::sigma1()).norm() < 1e-9);
  CHECK(r.full_rank);
}

TEST_CASE("early-stopping estimator on noise-free logs") {
  const auto s = fixtures::plant();
  const auto cm = CodingMatrix::manual(fixtures::rotation());
  RecordingOptions o;
  o.length = 10;
  o.noise_free = true;
  const auto log = record_coded_traffic(s, cm, o);
  const auto r = alg2_estimate(s.A, s.B, s.C, log);
  CHECK(r.cost <= 1e-8);
  CHECK(r.full_rank);
  // Y_0 = 0 from rest, so the first informative prefix has three samples
  CHECK(r.observations == 3);
}

TEST_CASE("early-stopping estimator exhausts on an uninformative stream") {
  const auto s = fixtures::plant();
  MeasurementLog log(2, 1);
  for (int k = 0; k < 5; ++k) log.record(Vector::Zero(2), Vector::Zero(1));
  try {
    alg2_estimate(s.A, s.B, s.C, log);
    FAIL("expected ExhaustedError");
  } catch (const ExhaustedError& e) {
    CHECK(e.kind() == ErrorKind::Exhausted);
    CHECK(e.last().sigma_hat == Matrix::Identity(2, 2));
  }
}

TEST_CASE("measurement log CSV round trip") {
  const auto s = fixtures::plant();
  const auto log = manual_log(s, fixtures::sigma2(), Vector::Zero(2), 7, 1, false);
  std::stringstream ss;
  log.write_csv(ss);
  const std::string header = ss.str().substr(0, ss.str().find('\n'));
  CHECK(header == "k,Y1,Y2,u1");
  const auto back = MeasurementLog::read_csv(ss);
  REQUIRE(back.size() == 7);
  for (int k = 0; k < 7; ++k) {
    CHECK((back.Y()[k] - log.Y()[k]).norm() < 1e-9 * (1.0 + log.Y()[k].norm()));
    CHECK((back.u()[k] - log.u()[k]).norm() < 1e-9 * (1.0 + log.u()[k].norm()));
  }
  CHECK(log.prefix(3).size() == 3);
  CHECK_THROWS_AS(log.prefix(8), Error);
  std::stringstream bad("x,Y1\n");
  CHECK_THROWS_AS(MeasurementLog::read_csv(bad), Error);
}

TEST_CASE("adapting with the true coding reproduces the uncoded trace") {
  const auto s = fixtures::plant();
  const auto d = steady_state_kalman(s);
  const auto base = fixtures::sensor_attack(s, d, 2.0, 200);
  for (const Matrix& sg : {fixtures::sigma1(), fixtures::sigma2(), fixtures::rotation()}) {
    const auto cm = CodingMatrix::manual(sg);
    const auto adapted = adapt_attack(sg, base);
    CHECK(adapted.meta.origin == "adapted");
    const auto plain = difference_dynamics(s, d, base, 200);
    const auto coded = difference_dynamics(s, d, adapted, 200, &cm);
    for (int k = 0; k <= 200; ++k) {
      CHECK((plain.dz[k] - coded.dz[k]).norm() < 1e-9 * (1.0 + plain.dz[k].norm()));
    }
  }
}

TEST_CASE("recording is deterministic and starts at rest") {
  const auto s = fixtures::plant();
  const auto cm = CodingMatrix::manual(fixtures::sigma2());
  RecordingOptions o;
  o.length = 8;
  o.seed = 5;
  const auto a = record_coded_traffic(s, cm, o);
  const auto b = record_coded_traffic(s, cm, o);
  for (int k = 0; k < 8; ++k) CHECK(a.Y()[k] == b.Y()[k]);
  o.noise_free = true;
  CHECK(record_coded_traffic(s, cm, o).Y()[0].norm() == 0.0);
}
