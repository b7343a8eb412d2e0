#include "semitoric/critical.hpp"

#include "semitoric/errors.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <map>
#include <random>

namespace semitoric {

std::string WilliamsonIndex::to_string() const {
  return "(k_e=" + std::to_string(k_e) + ", k_f=" + std::to_string(k_f) + ", k_h=" + std::to_string(k_h) +
         ", k_x=" + std::to_string(k_x) + ")";
}

namespace {

// Relative threshold with an absolute floor, so that a point where every
// gradient vanishes up to round-off still counts as rank 0.
int numerical_rank(const Vec& sv) {
  if (sv.size() == 0) return 0;
  const double cut = kTolRank * std::max(sv[0], 1.0);
  int r = 0;
  for (Eigen::Index i = 0; i < sv.size(); ++i)
    if (sv[i] > cut) ++r;
  return r;
}

}  // namespace

int rank_dF(const HamiltonianSystem& sys, const PhaseVector& p) {
  return numerical_rank(Eigen::JacobiSVD<Mat>(moment_jacobian(sys, p)).singularValues());
}

namespace {

struct Objective {
  double value;
  Vec gradient;
  double residual;  // largest discarded singular value
};

Objective rank_objective(const HamiltonianSystem& sys, const PhaseVector& p, int target) {
  const Mat g = moment_jacobian(sys, p);
  Eigen::JacobiSVD<Mat> svd(g, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const Vec sv = svd.singularValues();
  std::vector<Mat> hess;
  hess.reserve(sys.n);
  for (const auto& f : sys.components) hess.push_back(hessian_at(f, p));
  Objective out{0.0, Vec::Zero(p.size()), 0.0};
  for (int i = target; i < sv.size(); ++i) {
    out.value += sv[i] * sv[i];
    out.residual = std::max(out.residual, sv[i]);
    const Vec v = svd.matrixV().col(i);
    Vec acc = Vec::Zero(p.size());
    for (int r = 0; r < sys.n; ++r) acc += svd.matrixU()(r, i) * (hess[r] * v);
    out.gradient += 2.0 * sv[i] * acc;
  }
  return out;
}

}  // namespace

CriticalPoint find_critical_point(const HamiltonianSystem& sys, const PhaseVector& seed, int target_rank,
                                  const CriticalSearchOptions& opts) {
  sys.validate();
  require_dim(seed, sys.dim(), "find_critical_point");
  if (target_rank < 0 || target_rank >= sys.n)
    throw Error(ErrorKind::InvalidArgument, "target rank must be in [0, n)");
  const auto d = seed.size();
  PhaseVector p = seed;
  Objective obj = rank_objective(sys, p, target_rank);
  Mat hinv = Mat::Identity(d, d);
  for (int it = 0; it < opts.max_iter && obj.residual >= opts.tol_crit; ++it) {
    Vec dir = -hinv * obj.gradient;
    if (dir.dot(obj.gradient) >= 0.0) {
      hinv.setIdentity();
      dir = -obj.gradient;
    }
    double step = 1.0;
    Objective next;
    PhaseVector q;
    for (int ls = 0; ls < 60; ++ls, step *= 0.5) {
      q = p + step * dir;
      next = rank_objective(sys, q, target_rank);
      if (next.value <= obj.value + 1e-4 * step * dir.dot(obj.gradient)) break;
    }
    if (!(next.value <= obj.value)) break;
    const Vec s = q - p;
    const Vec y = next.gradient - obj.gradient;
    const double sy = s.dot(y);
    if (sy > 1e-300) {
      const double rho = 1.0 / sy;
      const Mat id = Mat::Identity(d, d);
      hinv = (id - rho * s * y.transpose()) * hinv * (id - rho * y * s.transpose()) + rho * s * s.transpose();
    }
    p = q;
    obj = next;
    if ((p - seed).norm() > opts.search_radius)
      throw Error(ErrorKind::NoConvergence, "critical point search left the seed neighbourhood");
  }
  if (obj.residual >= opts.tol_crit)
    throw Error(ErrorKind::NoConvergence,
                "critical point search stalled at residual " + std::to_string(obj.residual));
  CriticalPoint cp;
  cp.point = p;
  cp.residual = obj.residual;
  cp.rank = rank_dF(sys, p);
  if (cp.rank > target_rank || (cp.rank < target_rank && !opts.allow_lower_rank))
    throw Error(ErrorKind::WrongRank, "converged to rank " + std::to_string(cp.rank) + ", wanted " +
                                          std::to_string(target_rank));
  return cp;
}

namespace {

struct TrialOutcome {
  bool valid = false;
  bool ambiguous = false;
  WilliamsonIndex index;
};

TrialOutcome classify_spectrum(const Eigen::VectorXcd& eig, int rank, int n, double tol) {
  TrialOutcome out;
  double rho = 0.0;
  for (const auto& l : eig) rho = std::max(rho, std::abs(l));
  if (rho < 1e-12) return out;
  int zeros = 0, imag = 0, real = 0, cplx = 0;
  for (const auto& l0 : eig) {
    const std::complex<double> l = l0 / rho;
    const double re = std::abs(l.real()), im = std::abs(l.imag());
    const bool re0 = re < tol, im0 = im < tol;
    if ((re >= tol && re < 100 * tol) || (im >= tol && im < 100 * tol)) out.ambiguous = true;
    if (re0 && im0)
      ++zeros;
    else if (re0)
      ++imag;
    else if (im0)
      ++real;
    else
      ++cplx;
  }
  if (zeros != 2 * rank || imag % 2 || real % 2 || cplx % 4) return out;
  out.index = WilliamsonIndex{imag / 2, cplx / 4, real / 2, rank};
  out.valid = out.index.degrees_of_freedom() == n;
  return out;
}

}  // namespace

WilliamsonIndex williamson_classify(const HamiltonianSystem& sys, CriticalPoint& cp, const ClassifyOptions& opts) {
  sys.validate();
  require_dim(cp.point, sys.dim(), "williamson_classify");
  const int n = sys.n;
  const Mat g = moment_jacobian(sys, cp.point);
  Eigen::JacobiSVD<Mat> svd(g, Eigen::ComputeFullU);
  const int rank = numerical_rank(svd.singularValues());
  cp.rank = rank;
  if (rank == n) {
    cp.wtype = WilliamsonIndex{0, 0, 0, n};
    cp.degenerate = false;
    return cp.wtype;
  }
  const Mat null = svd.matrixU().rightCols(n - rank);
  std::vector<Mat> hess;
  for (const auto& f : sys.components) hess.push_back(hessian_at(f, cp.point));
  const Mat k = hamiltonian_operator(n);

  std::map<std::tuple<int, int, int, int>, int> votes;
  bool ambiguous = false;
  for (int trial = 0; trial < opts.trials; ++trial) {
    std::seed_seq seq{opts.seed, static_cast<std::uint64_t>(trial)};
    std::mt19937_64 rng(seq);
    std::normal_distribution<double> normal;
    Vec r(n - rank);
    for (auto& x : r) x = normal(rng);
    const Vec c = null * r.normalized();
    Mat a = Mat::Zero(2 * n, 2 * n);
    for (int i = 0; i < n; ++i) a += c[i] * hess[i];
    Eigen::EigenSolver<Mat> es(k * a, false);
    if (es.info() != Eigen::Success) throw Error(ErrorKind::NoConvergence, "eigenvalue solver failed");
    const TrialOutcome t = classify_spectrum(es.eigenvalues(), rank, n, opts.tol_eig);
    ambiguous = ambiguous || t.ambiguous;
    if (t.valid) ++votes[{t.index.k_e, t.index.k_f, t.index.k_h, t.index.k_x}];
  }
  if (votes.empty())
    throw Error(ErrorKind::Degenerate, "no Cartan structure detected at the critical point");
  auto best = std::max_element(votes.begin(), votes.end(),
                               [](const auto& a, const auto& b) { return a.second < b.second; });
  const auto [ke, kf, kh, kx] = best->first;
  cp.wtype = WilliamsonIndex{ke, kf, kh, kx};
  cp.degenerate = ambiguous || votes.size() > 1 || best->second != opts.trials;
  return cp.wtype;
}

WilliamsonIndex classify_at(const HamiltonianSystem& sys, const PhaseVector& p, const ClassifyOptions& opts) {
  CriticalPoint cp;
  cp.point = p;
  return williamson_classify(sys, cp, opts);
}

}  // namespace semitoric
