#include "semitoric/flow.hpp"

#include "semitoric/errors.hpp"

#include <boost/math/tools/minima.hpp>
#include <boost/math/tools/roots.hpp>

#include <cmath>
#include <numbers>

namespace semitoric {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

// Dormand-Prince 5(4) tableau.
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561, a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                 a65 = -5103.0 / 18656;
constexpr double a71 = 35.0 / 384, a73 = 500.0 / 1113, a74 = 125.0 / 192, a75 = -2187.0 / 6784,
                 a76 = 11.0 / 84;
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                 e6 = 22.0 / 525, e7 = -1.0 / 40;
constexpr double d1 = -12715105075.0 / 11282082432.0, d3 = 87487479700.0 / 32700410799.0,
                 d4 = -10690763975.0 / 1880347072.0, d5 = 701980252875.0 / 199316789632.0,
                 d6 = -1453857185.0 / 822651844.0, d7 = 69997945.0 / 29380423.0;

}  // namespace

Dopri5::Dopri5(Rhs rhs, Vec y0, double direction, IntegratorOptions opts)
    : rhs_(std::move(rhs)), opts_(opts), dir_(direction >= 0 ? 1.0 : -1.0), y_(std::move(y0)) {
  require_finite(y_, "integrator start state");
  y0_ = y_;
  initial_step();
}

void Dopri5::initial_step() {
  const Vec f0 = rhs_(y_);
  require_finite(f0, "vector field at start");
  const double d0 = y_.norm(), d1n = f0.norm();
  double h = (d0 > 1e-5 && d1n > 1e-5) ? 0.01 * d0 / d1n : 1e-4;
  h = std::clamp(h, 1e-6, 0.1);
  h_ = dir_ * h;
}

Vec Dopri5::attempt(const Vec& y, double h, std::array<Vec, 7>& k, Vec& err) const {
  k[0] = rhs_(y);
  k[1] = rhs_(y + h * (a21 * k[0]));
  k[2] = rhs_(y + h * (a31 * k[0] + a32 * k[1]));
  k[3] = rhs_(y + h * (a41 * k[0] + a42 * k[1] + a43 * k[2]));
  k[4] = rhs_(y + h * (a51 * k[0] + a52 * k[1] + a53 * k[2] + a54 * k[3]));
  k[5] = rhs_(y + h * (a61 * k[0] + a62 * k[1] + a63 * k[2] + a64 * k[3] + a65 * k[4]));
  Vec y1 = y + h * (a71 * k[0] + a73 * k[2] + a74 * k[3] + a75 * k[4] + a76 * k[5]);
  k[6] = rhs_(y1);
  err = h * (e1 * k[0] + e3 * k[2] + e4 * k[3] + e5 * k[4] + e6 * k[5] + e7 * k[6]);
  return y1;
}

Vec Dopri5::single_step(const Vec& y, double h) const {
  if (h == 0.0) return y;
  std::array<Vec, 7> k;
  Vec err;
  return attempt(y, h, k, err);
}

void Dopri5::step(double t_end) {
  const double remaining = (t_end - t_) * dir_;
  if (remaining <= 0.0) return;
  std::array<Vec, 7> k;
  Vec err;
  for (;;) {
    double h = h_;
    bool last = false;
    if (std::abs(h) >= remaining) {
      h = dir_ * remaining;
      last = true;
    }
    if (std::abs(h) < 1e-14 * std::max(1.0, std::abs(t_)))
      throw Error(ErrorKind::StepUnderflow, "step size underflow at t = " + std::to_string(t_));
    Vec y1 = attempt(y_, h, k, err);
    double acc = 0.0;
    bool finite = y1.allFinite() && err.allFinite();
    if (finite) {
      for (Eigen::Index i = 0; i < y_.size(); ++i) {
        const double sc = opts_.tol.abs + opts_.tol.rel * std::max(std::abs(y_[i]), std::abs(y1[i]));
        acc += (err[i] / sc) * (err[i] / sc);
      }
    }
    const double en = finite ? std::sqrt(acc / static_cast<double>(y_.size())) : 1e10;
    if (en <= 1.0) {
      const Vec ydiff = y1 - y_;
      cont_[0] = y_;
      cont_[1] = ydiff;
      cont_[2] = h * k[0] - ydiff;
      cont_[3] = ydiff - h * k[6] - cont_[2];
      cont_[4] = h * (d1 * k[0] + d3 * k[2] + d4 * k[3] + d5 * k[4] + d6 * k[5] + d7 * k[6]);
      t0_ = t_;
      y0_ = y_;
      t_ = last ? t_end : t_ + h;
      y_ = std::move(y1);
      ++steps_;
      const double fac = en > 0.0 ? std::min(5.0, std::max(0.2, 0.9 * std::pow(en, -0.2))) : 5.0;
      if (!last || std::abs(h_) < std::abs(h)) h_ = h * fac;
      if (y_.norm() > opts_.escape_radius)
        throw Error(ErrorKind::HorizonExceeded, "trajectory left the escape radius (non-compact leaf?)");
      if (steps_ > opts_.max_steps) throw Error(ErrorKind::HorizonExceeded, "step budget exhausted");
      return;
    }
    h_ = h * std::max(0.1, 0.9 * std::pow(en, -0.2));
  }
}

void Dopri5::advance_to(double t_end) {
  while ((t_end - t_) * dir_ > 0.0) step(t_end);
}

Vec Dopri5::dense(double t) const {
  const double h = t_ - t0_;
  if (h == 0.0) return y_;
  const double s = (t - t0_) / h, s1 = 1.0 - s;
  return cont_[0] + s * (cont_[1] + s1 * (cont_[2] + s * (cont_[3] + s1 * cont_[4])));
}

FlowTrace flow_trace(const HamiltonianSystem& sys, const FlowRequest& req) {
  require_dim(req.start, sys.dim(), "flow");
  if (req.coefficients.size() != sys.n)
    throw Error(ErrorKind::DimensionMismatch, "flow: coefficient count");
  if (!req.coefficients.allFinite() || !std::isfinite(req.duration))
    throw Error(ErrorKind::NonFinite, "flow request");
  const Vec coeffs = req.coefficients;
  const Vec f0 = moment_map(sys, req.start);
  IntegratorOptions io;
  io.tol = req.tol;
  io.escape_radius = req.escape_radius;
  Dopri5 ode([&sys, coeffs](const Vec& p) { return joint_vector_field(sys, coeffs, p); }, req.start,
             req.duration, io);
  FlowTrace out;
  while ((req.duration - ode.t()) * (req.duration >= 0 ? 1.0 : -1.0) > 0.0) {
    ode.step(req.duration);
    const Vec f = moment_map(sys, ode.y());
    for (int j = 0; j < sys.n; ++j)
      out.max_relative_drift =
          std::max(out.max_relative_drift, std::abs(f[j] - f0[j]) / (1.0 + std::abs(f0[j])));
  }
  out.end = ode.y();
  out.steps = ode.steps();
  return out;
}

PhaseVector flow(const HamiltonianSystem& sys, const FlowRequest& req) { return flow_trace(sys, req).end; }

PhaseVector joint_flow(const HamiltonianSystem& sys, const Vec& times, const PhaseVector& p, Tolerances tol) {
  return flow(sys, FlowRequest{times, p, 1.0, tol});
}

// ---------------------------------------------------------------------------

TorusAction::TorusAction(const HamiltonianSystem& sys, int skip, Tolerances tol) : sys_(&sys), tol_(tol) {
  for (int j = 0; j < sys.n; ++j)
    if (j != skip && sys.periodic[j]) generators_.push_back(j);
}

PhaseVector TorusAction::act_one(int slot, double angle, const PhaseVector& p) const {
  const int j = generators_[slot];
  const double a = wrap_angle(angle);
  if (a == 0.0) return p;
  const auto& f = sys_->components[j];
  if (f.exact_flow) return f.exact_flow(p, a);
  Vec c = Vec::Zero(sys_->n);
  c[j] = 1.0;
  return flow(*sys_, FlowRequest{c, p, a, tol_});
}

PhaseVector TorusAction::act(const std::vector<double>& angles, const PhaseVector& p) const {
  PhaseVector q = p;
  for (int s = 0; s < rank(); ++s) q = act_one(s, angles[s], q);
  return q;
}

TorusAction::Projection TorusAction::project(const PhaseVector& q, const PhaseVector& anchor) const {
  Projection best;
  best.angles.assign(rank(), 0.0);
  auto finish = [&](Projection& pr) {
    pr.point = act(pr.angles, anchor);
    pr.difference = phase_difference(*sys_, q, pr.point);
    pr.distance = pr.difference.norm();
  };
  finish(best);
  if (rank() == 0) return best;

  constexpr int kScan = 48;
  for (int sweep = 0; sweep < 6; ++sweep) {
    const double before = best.distance;
    for (int s = 0; s < rank(); ++s) {
      std::vector<double> others = best.angles;
      others[s] = 0.0;
      const PhaseVector base = act(others, anchor);
      const int j = generators_[s];
      auto dist2 = [&](double th) { return phase_difference(*sys_, q, act_one(s, th, base)).squaredNorm(); };
      auto slope = [&](double th) {
        const PhaseVector pt = act_one(s, th, base);
        return -2.0 * phase_difference(*sys_, q, pt).dot(ham_vector_field(sys_->components[j], pt));
      };
      int kbest = 0;
      double vbest = dist2(0.0);
      for (int k = 1; k < kScan; ++k) {
        const double v = dist2(kTwoPi * k / kScan);
        if (v < vbest) {
          vbest = v;
          kbest = k;
        }
      }
      const double lo = kTwoPi * (kbest - 1) / kScan, hi = kTwoPi * (kbest + 1) / kScan;
      const double glo = slope(lo), ghi = slope(hi);
      double th;
      if (glo < 0.0 && ghi > 0.0) {
        std::uintmax_t iters = 100;
        auto r = boost::math::tools::toms748_solve(
            slope, lo, hi, glo, ghi,
            [](double a, double b) { return std::abs(b - a) < 1e-15; }, iters);
        th = 0.5 * (r.first + r.second);
      } else {
        th = boost::math::tools::brent_find_minima(dist2, lo, hi, 52).first;
      }
      best.angles[s] = wrap_angle(th);
    }
    finish(best);
    if (before - best.distance <= 1e-15 * (1.0 + before) && sweep > 0) break;
  }
  return best;
}

double TorusAction::diameter(const PhaseVector& anchor) const {
  if (rank() == 0) return 0.0;
  const int per = rank() == 1 ? 48 : 12;
  std::vector<int> idx(rank(), 0);
  double d = 0.0;
  for (;;) {
    std::vector<double> ang(rank());
    for (int s = 0; s < rank(); ++s) ang[s] = kTwoPi * idx[s] / per;
    d = std::max(d, phase_distance(*sys_, act(ang, anchor), anchor));
    int s = 0;
    while (s < rank() && ++idx[s] == per) idx[s++] = 0;
    if (s == rank()) break;
  }
  return d;
}

// ---------------------------------------------------------------------------

HitResult first_hit_torus_orbit(const HamiltonianSystem& sys, int generator, const PhaseVector& start,
                                const PhaseVector& anchor, std::optional<double> t_min,
                                const HitOptions& opts) {
  sys.validate();
  require_dim(start, sys.dim(), "first_hit start");
  require_dim(anchor, sys.dim(), "first_hit anchor");
  if (generator < 0 || generator >= sys.n)
    throw Error(ErrorKind::InvalidArgument, "generator index out of range");
  if (sys.periodic[generator])
    throw Error(ErrorKind::InvalidArgument, "generator flow is periodic; first hit is ambiguous");
  const Vec dv = moment_map(sys, start) - moment_map(sys, anchor);
  if (dv.cwiseAbs().maxCoeff() > kTolLeaf * (1.0 + moment_map(sys, anchor).cwiseAbs().maxCoeff()))
    throw Error(ErrorKind::InvalidArgument, "start and anchor are on different leaves");

  const TorusAction torus(sys, generator, opts.tol);
  const double diam = torus.diameter(anchor);
  const double ball = diam > 1e-9 ? opts.exit_fraction * diam : 1e-3 * (1.0 + anchor.norm());

  const ScalarField& gen = sys.components[generator];
  const Rhs rhs = [&gen](const Vec& p) { return ham_vector_field(gen, p); };
  IntegratorOptions io;
  io.tol = opts.tol;
  io.escape_radius = opts.escape_radius;
  Dopri5 ode(rhs, start, 1.0, io);

  struct Sample {
    double t, g, dist;
  };
  auto sample = [&](double t, const Vec& p) {
    const auto pr = torus.project(p, anchor);
    return Sample{t, pr.difference.dot(rhs(p)), pr.distance};
  };

  Sample prev = sample(0.0, start);
  bool armed = false;
  auto arm = [&](const Sample& s) {
    if (armed) return;
    armed = t_min ? s.t >= *t_min : s.dist > ball;
  };
  arm(prev);
  while (ode.t() < opts.t_max) {
    ode.step(opts.t_max);
    constexpr int kSub = 4;
    for (int k = 1; k <= kSub; ++k) {
      const double t = k == kSub ? ode.t() : ode.last_t0() + ode.last_h() * k / kSub;
      const Sample cur = sample(t, k == kSub ? ode.y() : ode.dense(t));
      if (armed && prev.g < 0.0 && cur.g >= 0.0 && std::min(prev.dist, cur.dist) < ball) {
        const double t0 = ode.last_t0();
        const Vec y0 = ode.last_y0();
        auto exact = [&](double tt) { return ode.single_step(y0, tt - t0); };
        auto g = [&](double tt) {
          const Vec p = exact(tt);
          return torus.project(p, anchor).difference.dot(rhs(p));
        };
        std::uintmax_t iters = 100;
        const double tol_time = opts.tol_time;
        auto r = boost::math::tools::toms748_solve(
            g, prev.t, cur.t, g(prev.t), g(cur.t),
            [tol_time](double a, double b) { return std::abs(b - a) < tol_time; }, iters);
        const double th = 0.5 * (r.first + r.second);
        const Vec p = exact(th);
        const auto pr = torus.project(p, anchor);
        if (pr.distance < opts.tol_hit) return HitResult{th, p, pr.distance, pr.angles};
      }
      arm(cur);
      prev = cur;
    }
  }
  throw Error(ErrorKind::HorizonExceeded,
              "no return to the torus orbit before t_max = " + std::to_string(opts.t_max));
}

OrbitClosure close_orbit_times(const HamiltonianSystem& sys, int generator, const PhaseVector& from,
                               const PhaseVector& to, Tolerances tol, double tol_on_orbit) {
  require_dim(from, sys.dim(), "close_orbit_times from");
  require_dim(to, sys.dim(), "close_orbit_times to");
  const TorusAction torus(sys, generator, tol);
  for (int j = 0; j < sys.n; ++j)
    if (j != generator && !sys.periodic[j])
      throw Error(ErrorKind::InvalidArgument, "component " + std::to_string(j) + " is not periodic");
  const auto pr = torus.project(from, to);
  if (pr.distance > tol_on_orbit)
    throw Error(ErrorKind::NoConvergence,
                "point is not on the torus orbit (distance " + std::to_string(pr.distance) + ")");
  OrbitClosure out;
  out.times = Vec::Zero(sys.n);
  std::vector<double> back(torus.rank());
  for (int s = 0; s < torus.rank(); ++s) {
    double t = std::fmod(-pr.angles[s], kTwoPi);
    if (t < 0.0) t += kTwoPi;
    if (t >= kTwoPi) t -= kTwoPi;
    out.times[torus.generators()[s]] = t;
    back[s] = t;
  }
  out.residual = phase_distance(sys, torus.act(back, from), to);
  return out;
}

}  // namespace semitoric
