#include "semitoric/lattice.hpp"

#include "semitoric/critical.hpp"

#include <atomic>
#include <cmath>
#include <numbers>
#include <thread>

namespace semitoric {

RegularValue::RegularValue(Vec value) : v(std::move(value)) {
  require_finite(v, "RegularValue");
  if (v.size() >= 2) w = {v[0], v[1]};
}

PhaseVector project_to_leaf(const HamiltonianSystem& sys, const Vec& v, const PhaseVector& seed, double tol_leaf,
                            int max_iter) {
  require_dim(seed, sys.dim(), "project_to_leaf");
  if (v.size() != sys.n) throw Error(ErrorKind::DimensionMismatch, "project_to_leaf: value size");
  PhaseVector p = seed;
  Vec r = moment_map(sys, p) - v;
  for (int it = 0; it < max_iter; ++it) {
    if (r.lpNorm<Eigen::Infinity>() < tol_leaf) return p;
    const Mat jac = moment_jacobian(sys, p);
    const Vec step = jac.completeOrthogonalDecomposition().solve(r);
    double lambda = 1.0;
    bool moved = false;
    for (int ls = 0; ls < 40; ++ls, lambda *= 0.5) {
      const PhaseVector q = p - lambda * step;
      const Vec rq = moment_map(sys, q) - v;
      if (rq.allFinite() && rq.norm() < r.norm()) {
        p = q;
        r = rq;
        moved = true;
        break;
      }
    }
    if (!moved) break;
  }
  if (r.lpNorm<Eigen::Infinity>() < tol_leaf) return p;
  throw Error(ErrorKind::NoConvergence, "leaf projection stalled at residual " + std::to_string(r.norm()));
}

namespace {

// After a failed return search, decide whether v is a critical value by
// looking for a rank-deficient point on the same level set nearby.
bool looks_critical(const HamiltonianSystem& sys, const Vec& v, const PhaseVector& p) {
  try {
    CriticalSearchOptions o;
    o.allow_lower_rank = true;
    const CriticalPoint cp = find_critical_point(sys, p, sys.n - 1, o);
    return (moment_map(sys, cp.point) - v).norm() < 1e-6;
  } catch (const Error&) {
    return false;
  }
}

}  // namespace

PeriodBasis build_period_basis(const HamiltonianSystem& sys, const RegularValue& v, const PhaseVector& anchor_seed,
                               const BasisOptions& opts) {
  sys.validate();
  const int n = sys.n;
  const int g = opts.generator;
  if (g < 0 || g >= n) throw Error(ErrorKind::InvalidArgument, "generator index out of range");
  for (int j = 0; j < n; ++j)
    if (j != g && !sys.periodic[j])
      throw Error(ErrorKind::InvalidArgument, "component " + std::to_string(j) + " must be periodic");

  const PhaseVector a = project_to_leaf(sys, v.v, anchor_seed);
  if (rank_dF(sys, a) < n) throw Error(ErrorKind::NotRegular, "dF drops rank on the leaf: value is not regular");

  PeriodBasis basis;
  basis.at = v;
  basis.anchor = a;
  basis.rows = Mat::Zero(n, n);
  basis.residuals.resize(n);
  try {
    const HitResult hit = first_hit_torus_orbit(sys, g, a, a, std::nullopt, opts.hit);
    const OrbitClosure closure = close_orbit_times(sys, g, hit.point, a, opts.hit.tol);
    basis.hit_point = hit.point;
    Vec tau = closure.times;
    tau[g] = hit.time;
    basis.rows.row(0) = tau.transpose();
    int r = 1;
    for (int j = 0; j < n; ++j)
      if (j != g) basis.rows(r++, j) = 2.0 * std::numbers::pi;
    for (int i = 0; i < n; ++i) {
      const PhaseVector back = joint_flow(sys, basis.rows.row(i).transpose(), a, opts.hit.tol);
      basis.residuals[i] = phase_distance(sys, back, a);
    }
    if (basis.residuals.maxCoeff() > opts.tol_flow)
      throw Error(ErrorKind::ClosureFailed,
                  "period basis closure residual " + std::to_string(basis.residuals.maxCoeff()));
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::InvalidArgument && looks_critical(sys, v.v, a))
      throw Error(ErrorKind::NotRegular, "value is not regular (critical point on the leaf)");
    throw;
  }
  if (std::abs(basis.rows.determinant()) < 1e-12)
    throw Error(ErrorKind::Degenerate, "period basis rows are dependent");
  return basis;
}

double lattice_defect(const HamiltonianSystem& sys, const PeriodBasis& basis, int range, Tolerances tol) {
  const int n = sys.n;
  std::vector<int> m(n, -range);
  double worst = 0.0;
  while (true) {
    Vec times = Vec::Zero(n);
    int weight = 0;
    for (int i = 0; i < n; ++i) {
      times += m[i] * basis.rows.row(i).transpose();
      weight += std::abs(m[i]);
    }
    const PhaseVector back = joint_flow(sys, times, basis.anchor, tol);
    worst = std::max(worst, phase_distance(sys, back, basis.anchor) / (1.0 + weight));
    int i = 0;
    while (i < n && m[i] == range) m[i++] = -range;
    if (i == n) break;
    ++m[i];
  }
  return worst;
}

bool LogBranch::on_cut(std::complex<double> z, double tol) const {
  if (z == 0.0) return true;
  return std::abs(wrap_angle(std::arg(z) - cut_angle)) < tol;
}

std::complex<double> LogBranch::log(std::complex<double> z) const {
  if (z == 0.0) throw Error(ErrorKind::InvalidArgument, "logarithm of zero");
  if (on_cut(z)) throw Error(ErrorKind::BranchCut, "argument lies on the branch cut");
  // wrap_angle lands in (-pi, pi]; shift so arg is in (cut - 2 pi, cut)
  const double arg = cut_angle - std::numbers::pi + wrap_angle(std::arg(z) - cut_angle + std::numbers::pi);
  return {std::log(std::abs(z)), arg};
}

std::complex<double> inside_model_return(std::complex<double> w, double epsilon, const LogBranch& branch) {
  if (w == 0.0) throw Error(ErrorKind::NotRegular, "w = 0 is the critical value");
  if (!(epsilon > 0.0)) throw Error(ErrorKind::InvalidArgument, "epsilon must be positive");
  if (branch.on_cut(w)) throw Error(ErrorKind::BranchCut, "w lies on the branch cut");
  const std::complex<double> lw = branch.log(w);
  return std::complex<double>(2.0 * std::log(epsilon), 0.0) - std::conj(lw);
}

namespace {

GridEntry grid_entry(const HamiltonianSystem& sys, const RegularValue& at, const PhaseVector& seed,
                     const BasisOptions& opts) {
  GridEntry e;
  e.at = at;
  try {
    e.basis = build_period_basis(sys, at, seed, opts);
  } catch (const Error& err) {
    e.error = err.kind();
    e.message = err.what();
  }
  return e;
}

}  // namespace

std::vector<GridEntry> period_grid(const HamiltonianSystem& sys, const std::vector<RegularValue>& values,
                                   const PhaseVector& anchor_seed, const GridOptions& opts) {
  std::vector<GridEntry> out(values.size());
  if (values.empty()) return out;
  if (opts.policy == AnchorPolicy::Continuation) {
    PhaseVector seed = anchor_seed;
    for (std::size_t i = 0; i < values.size(); ++i) {
      out[i] = grid_entry(sys, values[i], seed, opts.basis);
      if (out[i].basis) seed = out[i].basis->anchor;
    }
    return out;
  }
  const int workers = std::max(1, std::min<int>(opts.threads, static_cast<int>(values.size())));
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i = next++; i < values.size(); i = next++)
      out[i] = grid_entry(sys, values[i], anchor_seed, opts.basis);
  };
  if (workers == 1) {
    work();
    return out;
  }
  std::vector<std::thread> pool;
  for (int t = 0; t < workers; ++t) pool.emplace_back(work);
  for (auto& t : pool) t.join();
  return out;
}

}  // namespace semitoric
