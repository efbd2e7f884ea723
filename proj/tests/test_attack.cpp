#include <doctest.h>

#include <cmath>

#include "cpscoding/attack.hpp"
#include "cpscoding/error.hpp"
#include "fixtures.hpp"

using namespace cpscoding;

namespace {

struct Paired {
  Series dz, de;
};

// Residual and error differences between attacked and nominal runs that share
// noise, measured inside the closed loop.
Paired paired_run(const LinearSystem& s, const KalmanDesign& d, const AttackSequence& a, int T,
                  const ControlLaw& law, const CodingMatrix* coding, std::uint64_t seed) {
  KalmanObserver obs(s, d);
  SimulationOptions o;
  o.horizon = T;
  o.seed = seed;
  o.observer = &obs;
  if (coding) o.channel = coding->channel();
  const auto nom = simulate(s, law, o);
  const auto att = simulate_attacked(s, law, a, o);
  Paired p;
  for (int k = 0; k <= T; ++k) {
    p.dz.push_back(att.residuals[k] - nom.residuals[k]);
    p.de.push_back((att.states[k] - att.estimates[k]) - (nom.states[k] - nom.estimates[k]));
  }
  return p;
}

Matrix feedback() {
  Matrix L(1, 2);
  L << 0.2, 0.4;
  return L;
}

}  // namespace

TEST_CASE("stealth feasibility of the reference plant") {
  const auto s = fixtures::plant();
  const auto d = steady_state_kalman(s);
  const auto v = stealth_feasible(s, d);
  CHECK(v.feasible);
  REQUIRE(v.pairs.size() == 1);
  CHECK(v.pairs[0].real_lambda() == doctest::Approx(1.0));
}

TEST_CASE("stable plants admit no stealthy attack") {
  auto s = fixtures::plant();
  Matrix A = s.A;
  A(1, 1) = 0.5;
  s = make_system(A, s.B, s.C, s.Q, s.R);
  const auto v = stealth_feasible(s, steady_state_kalman(s));
  CHECK_FALSE(v.feasible);
  CHECK_FALSE(v.reason.empty());
}

TEST_CASE("purely complex unstable spectrum is unsupported") {
  Matrix A(2, 2);
  A << 0.0, -1.2, 1.2, 0.0;
  const auto s = make_system(A, Matrix::Identity(2, 1), Matrix::Identity(2, 2),
                             0.01 * Matrix::Identity(2, 2), 0.01 * Matrix::Identity(2, 2));
  const auto d = steady_state_kalman(s);
  try {
    stealth_feasible(s, d);
    FAIL("expected UnsupportedSpectrum");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::UnsupportedSpectrum);
  }
}

TEST_CASE("sensor attack respects the budget and follows its recursion") {
  const auto s = fixtures::plant();
  const auto d = steady_state_kalman(s);
  const auto a = fixtures::sensor_attack(s, d, 2.0, 200);
  CHECK(a.horizon() == 200);
  CHECK(a.sensor_only());
  const auto tr = difference_dynamics(s, d, a, 200);
  CHECK(max_norm(tr.dz) <= 2.0 * (1.0 + 1e-12));
  CHECK(max_norm(tr.dz) == doctest::Approx(2.0).epsilon(1e-9));
  const int n = s.n();
  const Vector v = *a.meta.eigenvector;
  const double lam = *a.meta.eigenvalue;
  const double sc = *a.meta.scale;
  // phase one ends on the eigenvector
  const Vector end = tr.de[n - 1];
  CHECK(std::abs(end.dot(v)) / (end.norm() * v.norm()) == doctest::Approx(1.0).epsilon(1e-9));
  for (int i = 0; n + i <= 200; ++i) {
    const Vector expect = a.y_a[i] - sc * std::pow(lam, i + 1) * (s.C * v);
    CHECK((a.y_a[n + i] - expect).norm() < 1e-10 * (1.0 + expect.norm()));
  }
  // error difference keeps growing
  CHECK(tr.de[200].norm() > tr.de[20].norm());
}

TEST_CASE("difference dynamics initial step") {
  const auto s = fixtures::plant();
  const auto d = steady_state_kalman(s);
  auto a = AttackSequence::zeros(2, 1, 5);
  a.y_a[0] = Vector::Constant(2, 0.25);
  const auto tr = difference_dynamics(s, d, a, 5);
  CHECK((tr.dz[0] - a.y_a[0]).norm() == 0.0);
  CHECK((tr.de[0] + d.K * a.y_a[0]).norm() < 1e-15);
  CHECK_THROWS_AS(difference_dynamics(s, d, a, 6), Error);
}

TEST_CASE("difference dynamics equals paired closed-loop simulation") {
  const auto s = fixtures::plant();
  const auto d = steady_state_kalman(s);
  CombinedAttackOptions co;
  co.T = 60;
  co.eps_bound = 0.3;
  co.seed = 4;
  const auto comb = synth_combined_attack(s, d, co);
  const auto sens = fixtures::sensor_attack(s, d, 2.0, 60);
  const auto coding = CodingMatrix::manual(fixtures::sigma1());
  for (const AttackSequence* a : {&comb, &sens}) {
    for (const CodingMatrix* c : {static_cast<const CodingMatrix*>(nullptr), &coding}) {
      const auto tr = difference_dynamics(s, d, *a, 60, c);
      for (const auto& law : {zero_law(1), state_feedback(feedback())}) {
        const auto p = paired_run(s, d, *a, 60, law, c, 77);
        for (int k = 0; k <= 60; ++k) {
          CHECK((p.dz[k] - tr.dz[k]).norm() < 1e-8 * (1.0 + tr.dz[k].norm()));
          CHECK((p.de[k] - tr.de[k]).norm() < 1e-8 * (1.0 + tr.de[k].norm()));
        }
      }
    }
  }
}

TEST_CASE("redesigned gain matches a simulation of the coded plant") {
  const auto s = fixtures::plant();
  const auto d = steady_state_kalman(s);
  const auto coding = CodingMatrix::manual(fixtures::sigma2());
  const auto a = fixtures::sensor_attack(s, d, 2.0, 40);
  const auto tr = difference_dynamics(s, d, a, 40, &coding, GainMode::Redesigned);
  const auto cs = coded_system(s, fixtures::sigma2());
  const auto cd = steady_state_kalman(cs);
  const auto p = paired_run(cs, cd, a, 40, zero_law(1), nullptr, 3);
  for (int k = 0; k <= 40; ++k) CHECK((p.dz[k] - tr.dz[k]).norm() < 1e-8 * (1.0 + tr.dz[k].norm()));
}

TEST_CASE("combined attack cancels the residue on the uncoded plant") {
  const auto s = fixtures::plant();
  const auto d = steady_state_kalman(s);
  CombinedAttackOptions co;
  const auto a = synth_combined_attack(s, d, co);
  const auto tr = difference_dynamics(s, d, a, 200);
  CHECK(max_norm(tr.dz) < 1e-12);
  for (int k = 0; k < 200; ++k) CHECK(a.u_a[k].norm() == doctest::Approx(co.u_bound));
  CHECK(tr.de[200].norm() > 10.0);
}

TEST_CASE("combined attack with bounded sensor noise") {
  const auto s = fixtures::plant();
  const auto d = steady_state_kalman(s);
  CombinedAttackOptions co;
  co.eps_bound = 0.5;
  co.seed = 9;
  const auto tr = difference_dynamics(s, d, synth_combined_attack(s, d, co), 200);
  CHECK(max_norm(tr.dz) <= 2.0);
}

TEST_CASE("alternating recursion") {
  Vector y0(2), y1(2);
  y0 << 1.0, 2.0;
  y1 << -1.0, 0.5;
  const auto a = alternating_recursion_attack(y0, y1, 1, 6);
  CHECK(a.y_a.size() == 7);
  CHECK(a.y_a[2] == y0 - y0);
  CHECK(a.y_a[3] == y1 - y0);
  CHECK(a.y_a[4] == a.y_a[2] - y0);
  CHECK(a.sensor_only());
}
