#include "cpscoding/adversary.hpp"

#include <cmath>
#include <iomanip>
#include <istream>
#include <limits>
#include <ostream>
#include <random>
#include <sstream>

namespace cpscoding {

void MeasurementLog::record(const Vector& Y, const Vector& u) {
  if (p_ < 0) p_ = static_cast<int>(Y.size());
  if (m_ < 0) m_ = static_cast<int>(u.size());
  if (Y.size() != p_ || u.size() != m_) {
    fail(ErrorKind::DimensionMismatch, "measurement does not match the log's dimensions");
  }
  Y_.push_back(Y);
  u_.push_back(u);
}

MeasurementLog MeasurementLog::prefix(int count) const {
  if (count < 0 || count > size()) {
    fail(ErrorKind::IndexOutOfRange, "log prefix longer than the log");
  }
  MeasurementLog out(p_, m_);
  out.Y_.assign(Y_.begin(), Y_.begin() + count);
  out.u_.assign(u_.begin(), u_.begin() + count);
  return out;
}

void MeasurementLog::write_csv(std::ostream& os) const {
  os << "k";
  for (int i = 1; i <= p_; ++i) os << ",Y" << i;
  for (int i = 1; i <= m_; ++i) os << ",u" << i;
  os << "\n";
  os << std::setprecision(17);
  for (int k = 0; k < size(); ++k) {
    os << k;
    for (int i = 0; i < p_; ++i) os << "," << Y_[static_cast<std::size_t>(k)](i);
    for (int i = 0; i < m_; ++i) os << "," << u_[static_cast<std::size_t>(k)](i);
    os << "\n";
  }
}

MeasurementLog MeasurementLog::read_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line)) fail(ErrorKind::IoError, "measurement CSV is empty");
  int p = 0, m = 0;
  {
    std::stringstream ss(line);
    std::string cell;
    std::getline(ss, cell, ',');
    if (cell != "k") fail(ErrorKind::IoError, "measurement CSV must start with column k");
    while (std::getline(ss, cell, ',')) {
      if (!cell.empty() && cell[0] == 'Y') ++p;
      else if (!cell.empty() && cell[0] == 'u') ++m;
      else fail(ErrorKind::IoError, "unexpected measurement CSV column '" + cell + "'");
    }
  }
  MeasurementLog log(p, m);
  int row = 0;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string cell;
    std::vector<double> vals;
    while (std::getline(ss, cell, ',')) vals.push_back(std::stod(cell));
    if (static_cast<int>(vals.size()) != 1 + p + m) {
      fail(ErrorKind::IoError, "measurement CSV row " + std::to_string(row) + " has wrong width");
    }
    Vector Y(p), u(m);
    for (int i = 0; i < p; ++i) Y(i) = vals[static_cast<std::size_t>(1 + i)];
    for (int i = 0; i < m; ++i) u(i) = vals[static_cast<std::size_t>(1 + p + i)];
    log.record(Y, u);
    ++row;
  }
  return log;
}

BilinearProblem build_bilinear(const Matrix& A, const Matrix& B, const Matrix& C,
                               const MeasurementLog& log) {
  if (log.empty()) fail(ErrorKind::InvalidArgument, "bilinear problem needs an observation");
  const int n = static_cast<int>(A.rows());
  const int p = static_cast<int>(C.rows());
  if (log.p() != p || log.m() != B.cols()) {
    fail(ErrorKind::DimensionMismatch, "log dimensions do not match (B, C)");
  }
  BilinearProblem pr;
  pr.p = p;
  pr.n = n;
  const int count = log.size();
  pr.d.resize(p * count);
  Matrix Ak = Matrix::Identity(n, n);
  Vector drift = Vector::Zero(n);  // sum_{j<k} A^{k-1-j} B u_j
  for (int k = 0; k < count; ++k) {
    pr.T.push_back(C * Ak);
    pr.S.push_back(C * drift);
    pr.d.segment(k * p, p) = log.Y()[static_cast<std::size_t>(k)];
    drift = A * drift + B * log.u()[static_cast<std::size_t>(k)];
    Ak = A * Ak;
  }
  return pr;
}

double bilinear_cost(const BilinearProblem& pr, const Matrix& sigma, const Vector& x0) {
  double c = 0.0;
  for (int k = 0; k < pr.steps(); ++k) {
    const Vector r = pr.observation(k) - sigma * (pr.T[static_cast<std::size_t>(k)] * x0 + pr.S[static_cast<std::size_t>(k)]);
    c += r.squaredNorm();
  }
  return c;
}

namespace {

struct Correction {
  Matrix delta;
  bool deficient = false;
};

// Minimum-norm solution of M delta = R (column-wise).
Correction min_norm_correction(const Matrix& M, const Matrix& R) {
  Eigen::CompleteOrthogonalDecomposition<Matrix> cod(M);
  cod.setThreshold(1e-12);
  return {cod.solve(R), cod.rank() < M.cols()};
}

void x_step(const BilinearProblem& pr, const Matrix& sigma, Vector& x0, bool& deficient) {
  const int N1 = pr.steps(), p = pr.p, n = pr.n;
  Matrix M(p * N1, n);
  Vector r(p * N1);
  for (int k = 0; k < N1; ++k) {
    M.middleRows(k * p, p) = sigma * pr.T[static_cast<std::size_t>(k)];
    r.segment(k * p, p) = pr.observation(k) - sigma * pr.S[static_cast<std::size_t>(k)] -
                          M.middleRows(k * p, p) * x0;
  }
  Correction c = min_norm_correction(M, r);
  deficient = deficient || c.deficient;
  x0 += c.delta.col(0);
}

void sigma_step(const BilinearProblem& pr, Matrix& sigma, const Vector& x0, bool& deficient) {
  const int N1 = pr.steps(), p = pr.p;
  // Row i: sum_k (Y_k(i) - sigma_i . h_k)^2 with h_k = T_k x0 + S_k; every
  // row shares the design matrix H.
  Matrix H(N1, p);
  Matrix Y(N1, p);
  for (int k = 0; k < N1; ++k) {
    H.row(k) = (pr.T[static_cast<std::size_t>(k)] * x0 + pr.S[static_cast<std::size_t>(k)]).transpose();
    Y.row(k) = pr.observation(k).transpose();
  }
  const Matrix R = Y - H * sigma.transpose();
  Correction c = min_norm_correction(H, R);
  deficient = deficient || c.deficient;
  sigma += c.delta.transpose();
}

EstimateResult run_als(const BilinearProblem& pr, Matrix sigma, Vector x0,
                       const AlsOptions& opt) {
  EstimateResult res;
  bool deficient = false;
  double prev = bilinear_cost(pr, sigma, x0);
  res.cost_history.push_back(prev);
  int it = 0;
  while (it < opt.max_iter) {
    ++it;
    x_step(pr, sigma, x0, deficient);
    res.cost_history.push_back(bilinear_cost(pr, sigma, x0));
    sigma_step(pr, sigma, x0, deficient);
    const double cost = bilinear_cost(pr, sigma, x0);
    res.cost_history.push_back(cost);
    const double drop = prev - cost;
    prev = cost;
    if (cost <= std::numeric_limits<double>::min()) break;
    if (drop < opt.tol * cost) break;
  }
  res.sigma_hat = std::move(sigma);
  res.x0_hat = std::move(x0);
  res.cost = prev;
  res.iterations = it;
  res.degenerate = deficient;
  res.full_rank = smallest_singular_value(res.sigma_hat) > opt.rank_tol;
  return res;
}

}  // namespace

EstimateResult solve_bilinear_als(const BilinearProblem& pr, const Matrix& init_sigma,
                                  const Vector& init_x0, const AlsOptions& opt) {
  if (init_sigma.rows() != pr.p || init_sigma.cols() != pr.p || init_x0.size() != pr.n) {
    fail(ErrorKind::DimensionMismatch, "ALS initial point has wrong shape");
  }
  EstimateResult best = run_als(pr, init_sigma, init_x0, opt);
  if (opt.nstarts > 1) {
    std::mt19937_64 rng(opt.seed);
    std::normal_distribution<double> normal(0.0, opt.perturbation);
    for (int s = 1; s < opt.nstarts; ++s) {
      Matrix start = init_sigma;
      for (Eigen::Index i = 0; i < start.size(); ++i) start.data()[i] += normal(rng);
      EstimateResult r = run_als(pr, start, init_x0, opt);
      if (r.cost < best.cost) best = std::move(r);
    }
  }
  return best;
}

EstimateResult solve_sigma_given_x0(const BilinearProblem& pr, const Vector& x0,
                                    const AlsOptions& opt) {
  if (x0.size() != pr.n) fail(ErrorKind::DimensionMismatch, "x0 has wrong size");
  EstimateResult res;
  Matrix sigma = Matrix::Zero(pr.p, pr.p);
  bool deficient = false;
  sigma_step(pr, sigma, x0, deficient);
  res.sigma_hat = sigma;
  res.x0_hat = x0;
  res.cost = bilinear_cost(pr, sigma, x0);
  res.cost_history = {res.cost};
  res.iterations = 1;
  res.degenerate = deficient;
  res.full_rank = smallest_singular_value(sigma) > opt.rank_tol;
  return res;
}

EstimateResult alg2_estimate(const Matrix& A, const Matrix& B, const Matrix& C,
                             const MeasurementLog& stream, const Alg2Options& opt) {
  const int p = static_cast<int>(C.rows());
  const int n = static_cast<int>(A.rows());
  const int limit = opt.max_steps > 0 ? std::min(opt.max_steps, stream.size()) : stream.size();
  Matrix sigma = Matrix::Identity(p, p);
  Vector x0 = Vector::Zero(n);
  double er = std::numeric_limits<double>::infinity();
  AlsOptions als = opt.als;
  als.rank_tol = opt.rank_tol;

  EstimateResult accepted;
  accepted.sigma_hat = sigma;
  accepted.x0_hat = x0;
  accepted.cost = er;
  EstimateResult last = accepted;
  for (int s = 0; s < limit; ++s) {
    const BilinearProblem pr = build_bilinear(A, B, C, stream.prefix(s + 1));
    EstimateResult r = solve_bilinear_als(pr, sigma, x0, als);
    r.observations = s + 1;
    if (r.full_rank) {
      sigma = r.sigma_hat;
      x0 = r.x0_hat;
      er = r.cost;
      accepted = r;
      last = r;
    } else {
      last = accepted;
      last.observations = s + 1;
    }
    const bool identity = (sigma - Matrix::Identity(p, p)).norm() <= opt.identity_tol;
    if (!(er > opt.epsilon) && !identity) return accepted;
  }
  throw ExhaustedError("no full-rank non-identity estimate with cost <= epsilon after " +
                           std::to_string(limit) + " observations",
                       last);
}

AttackSequence adapt_attack(const Matrix& sigma_hat, const AttackSequence& base) {
  AttackSequence out = base;
  for (auto& y : out.y_a) {
    if (y.size() != sigma_hat.cols()) {
      fail(ErrorKind::DimensionMismatch, "estimated coding matrix does not match the attack");
    }
    y = sigma_hat * y;
  }
  out.meta.origin = "adapted";
  out.meta.sigma_hat = sigma_hat;
  return out;
}

MeasurementLog record_coded_traffic(const LinearSystem& sys, const CodingMatrix& coding,
                                    const RecordingOptions& opt) {
  if (opt.length < 1) fail(ErrorKind::InvalidArgument, "recording length must be >= 1");
  std::mt19937_64 rng(opt.input_seed);
  std::normal_distribution<double> normal(0.0, opt.input_sigma);
  Series inputs(static_cast<std::size_t>(opt.length), Vector::Zero(sys.m()));
  for (auto& u : inputs) {
    for (Eigen::Index i = 0; i < u.size(); ++i) u(i) = normal(rng);
  }
  SimulationOptions so;
  so.seed = opt.seed;
  so.horizon = std::max(1, opt.length - 1);
  so.noise_free = opt.noise_free;
  so.channel = coding.channel();
  const Trajectory tr = simulate(sys, open_loop(inputs), so);
  MeasurementLog log(sys.p(), sys.m());
  for (int k = 0; k < opt.length; ++k) {
    log.record(tr.transmitted[static_cast<std::size_t>(k)], inputs[static_cast<std::size_t>(k)]);
  }
  return log;
}

}  // namespace cpscoding
