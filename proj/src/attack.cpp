#include "cpscoding/attack.hpp"

#include <cmath>
#include <random>
#include <string>

#include "cpscoding/error.hpp"

namespace cpscoding {

bool AttackSequence::sensor_only(double tol) const {
  for (const auto& u : u_a) {
    if (u.size() > 0 && u.cwiseAbs().maxCoeff() > tol) return false;
  }
  return true;
}

AttackSequence AttackSequence::zeros(int p, int m, int horizon) {
  AttackSequence a;
  a.y_a.assign(static_cast<std::size_t>(horizon + 1), Vector::Zero(p));
  a.u_a.assign(static_cast<std::size_t>(horizon + 1), Vector::Zero(m));
  return a;
}

StealthVerdict stealth_feasible(const LinearSystem& sys, const KalmanDesign& design,
                                double tol) {
  StealthVerdict verdict;
  const auto pairs = unstable_eigenpairs(sys);
  if (pairs.empty()) {
    verdict.reason = "A has no unstable eigenvalue";
    return verdict;
  }
  bool any_real = false;
  const Matrix qoa = controllability_matrix(design.F, design.K);
  for (const auto& pr : pairs) {
    if (!pr.is_real()) continue;
    any_real = true;
    if (in_span(pr.real_vector(), qoa, tol)) verdict.pairs.push_back(pr);
  }
  if (!any_real) {
    fail(ErrorKind::UnsupportedSpectrum, "every unstable eigenvalue of A is complex");
  }
  verdict.feasible = !verdict.pairs.empty();
  if (!verdict.feasible) {
    verdict.reason = "no unstable eigenvector lies in the span of the (A-KCA, K) controllability matrix";
  }
  return verdict;
}

namespace {

void check_length(const AttackSequence& a, int T, int p, int m) {
  if (a.horizon() < T || static_cast<int>(a.u_a.size()) < T) {
    fail(ErrorKind::HorizonTooShort, "attack is shorter than the requested horizon");
  }
  if (!a.y_a.empty() && a.y_a[0].size() != p) {
    fail(ErrorKind::DimensionMismatch, "sensor injections have wrong size");
  }
  if (!a.u_a.empty() && a.u_a[0].size() != m) {
    fail(ErrorKind::DimensionMismatch, "actuator injections have wrong size");
  }
}

}  // namespace

std::vector<double> DifferenceTrace::de_norms() const {
  std::vector<double> out;
  out.reserve(de.size());
  for (const auto& v : de) out.push_back(v.norm());
  return out;
}

std::vector<double> DifferenceTrace::dz_norms() const {
  std::vector<double> out;
  out.reserve(dz.size());
  for (const auto& v : dz) out.push_back(v.norm());
  return out;
}

DifferenceTrace difference_dynamics(const LinearSystem& sys, const KalmanDesign& design,
                                    const AttackSequence& attack, int T,
                                    const CodingMatrix* coding, GainMode gain) {
  if (T < 0) fail(ErrorKind::InvalidArgument, "horizon must be non-negative");
  const int n = sys.n(), p = sys.p(), m = sys.m();
  check_length(attack, T, p, m);
  if (coding && coding->p() != p) {
    fail(ErrorKind::SingularCoding, "coding matrix has wrong size");
  }

  // Gain, output map and injection transform for the chosen frame.
  Matrix K = design.K;
  Matrix Cf = sys.C;
  Matrix inj = Matrix::Identity(p, p);
  if (coding) {
    if (gain == GainMode::Redesigned) {
      KalmanOptions ko;
      ko.confidence = design.confidence;
      const KalmanDesign coded = steady_state_kalman(coded_system(sys, coding->sigma()), ko);
      K = coded.K;
      Cf = coding->sigma() * sys.C;
    } else {
      inj = coding->sigma_inv();
    }
  }
  const Matrix F = sys.A - K * Cf * sys.A;
  const Matrix CA = Cf * sys.A;
  const Matrix CB = Cf * sys.B;
  const Matrix BK = sys.B - K * CB;

  DifferenceTrace t;
  t.coded = coding != nullptr;
  if (coding) t.sigma = coding->sigma();
  t.gain = gain;
  t.de.reserve(static_cast<std::size_t>(T + 1));
  t.dz.reserve(static_cast<std::size_t>(T + 1));

  Vector de = Vector::Zero(n);
  Vector u_prev = Vector::Zero(m);
  for (int k = 0; k <= T; ++k) {
    const Vector y = inj * attack.y_a[static_cast<std::size_t>(k)];
    Vector dz = CA * de + y + CB * u_prev;
    de = F * de - K * y + BK * u_prev;
    t.dz.push_back(std::move(dz));
    t.de.push_back(de);
    u_prev = attack.u_a[static_cast<std::size_t>(k)];
  }
  return t;
}

AttackSequence synth_sensor_attack(const LinearSystem& sys, const KalmanDesign& design,
                                   const EigenPair& pair, double M, int T) {
  if (!pair.is_real()) {
    fail(ErrorKind::UnsupportedSpectrum, "sensor attack synthesis needs a real eigenpair");
  }
  if (!(M > 0.0)) fail(ErrorKind::InvalidArgument, "budget M must be positive");
  const int n = sys.n(), p = sys.p(), m = sys.m();
  if (T < n) fail(ErrorKind::HorizonTooShort, "horizon shorter than the first phase");
  const double lambda = pair.real_lambda();
  const Vector v = pair.real_vector();
  const Vector y_star = sys.C * v;

  // de_{n-1} = -sum_j F^{n-1-j} K y_j for j = 0..n-1.
  Matrix G(n, n * p);
  Matrix block = design.K;
  for (int j = n - 1; j >= 0; --j) {
    G.middleCols(j * p, p) = -block;
    block = design.F * block;
  }
  const Vector stacked = min_norm_solve(G, v);

  AttackSequence unit = AttackSequence::zeros(p, m, T);
  for (int j = 0; j < n; ++j) unit.y_a[static_cast<std::size_t>(j)] = stacked.segment(j * p, p);
  double lam_pow = lambda;
  for (int k = n; k <= T; ++k) {
    const int i = k - n;
    unit.y_a[static_cast<std::size_t>(k)] = unit.y_a[static_cast<std::size_t>(i)] - lam_pow * y_star;
    lam_pow *= lambda;
  }

  const double peak = max_norm(difference_dynamics(sys, design, unit, T).dz);
  if (!(peak > 0.0) || !std::isfinite(peak)) {
    fail(ErrorKind::ScaleSearchFailed, "unit-scale attack has no finite residue peak");
  }
  const double s = M / peak;
  AttackSequence out = unit;
  for (auto& y : out.y_a) y *= s;
  const double check = max_norm(difference_dynamics(sys, design, out, T).dz);
  if (check > M * (1.0 + 1e-9)) {
    fail(ErrorKind::ScaleSearchFailed, "scaled attack exceeds the budget");
  }
  out.budget = M;
  out.meta.origin = "sensor";
  out.meta.eigenvalue = lambda;
  out.meta.eigenvector = v;
  out.meta.y_star = y_star;
  out.meta.scale = s;
  out.meta.phase1_length = n;
  return out;
}

AttackSequence synth_combined_attack(const LinearSystem& sys, const KalmanDesign& design,
                                     const CombinedAttackOptions& opt) {
  const int n = sys.n(), p = sys.p(), m = sys.m();
  const int T = opt.T;
  if (T < 1) fail(ErrorKind::InvalidArgument, "horizon must be >= 1");
  if (sys.B.norm() == 0.0) fail(ErrorKind::InvalidArgument, "B must be nonzero");
  std::mt19937_64 rng(opt.seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  auto random_unit = [&](int dim) {
    Vector d(dim);
    do {
      for (int i = 0; i < dim; ++i) d(i) = normal(rng);
    } while (d.norm() == 0.0);
    return Vector(d.normalized());
  };

  // Direction: B' w for the left eigenvector w of the dominant real unstable
  // mode, so the injected input feeds that mode.
  Vector dir;
  std::optional<double> used_lambda;
  const auto left = unstable_eigenpairs(Matrix(sys.A.transpose()));
  double best = -1.0;
  for (const auto& pr : left) {
    if (!pr.is_real()) continue;
    const Vector bw = sys.B.transpose() * pr.real_vector();
    if (bw.norm() <= 1e-12) continue;
    if (std::abs(pr.real_lambda()) > best) {
      best = std::abs(pr.real_lambda());
      dir = bw.normalized();
      used_lambda = pr.real_lambda();
    }
  }
  if (dir.size() == 0) dir = random_unit(m);
  const Vector u = opt.u_bound * dir;

  const double eps_r = std::min(opt.eps_bound, opt.M);
  auto eps = [&]() -> Vector {
    if (eps_r <= 0.0) return Vector::Zero(p);
    const double radius = eps_r * std::uniform_real_distribution<double>(0.0, 1.0)(rng);
    return radius * random_unit(p);
  };

  AttackSequence a = AttackSequence::zeros(p, m, T);
  const Matrix CA = sys.C * sys.A, CB = sys.C * sys.B;
  const Matrix BK = sys.B - design.K * CB;
  Vector de = Vector::Zero(n);
  a.y_a[0] = eps();
  de = -design.K * a.y_a[0];
  for (int k = 0; k < T; ++k) {
    a.u_a[static_cast<std::size_t>(k)] = u;
    Vector y = -CA * de - CB * u + eps();
    de = design.F * de - design.K * y + BK * u;
    a.y_a[static_cast<std::size_t>(k + 1)] = std::move(y);
  }
  a.budget = opt.M;
  a.meta.origin = "combined";
  a.meta.eigenvalue = used_lambda;
  return a;
}

AttackSequence alternating_recursion_attack(const Vector& y0, const Vector& y1, int m,
                                            int T) {
  if (y0.size() != y1.size()) fail(ErrorKind::DimensionMismatch, "y0 and y1 differ in size");
  if (T < 1) fail(ErrorKind::InvalidArgument, "horizon must be >= 1");
  AttackSequence a = AttackSequence::zeros(static_cast<int>(y0.size()), m, T);
  a.y_a[0] = y0;
  a.y_a[1] = y1;
  for (int k = 2; k <= T; ++k) {
    a.y_a[static_cast<std::size_t>(k)] = a.y_a[static_cast<std::size_t>(k - 2)] - y0;
  }
  a.meta.origin = "recursion";
  return a;
}

}  // namespace cpscoding
