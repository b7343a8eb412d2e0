#pragma once

#include "semitoric/geometry.hpp"

#include <array>
#include <functional>
#include <optional>
#include <vector>

namespace semitoric {

struct Tolerances {
  double rel = 1e-10;
  double abs = 1e-12;
};

using Rhs = std::function<Vec(const Vec&)>;

struct IntegratorOptions {
  Tolerances tol;
  /// States farther than this from the origin abort the integration.
  double escape_radius = 1e4;
  long max_steps = 2'000'000;
};

/// Dormand-Prince 5(4) for autonomous systems, with the 4th-order
/// continuous extension of Hairer-Norsett-Wanner.
class Dopri5 {
public:
  Dopri5(Rhs rhs, Vec y0, double direction, IntegratorOptions opts = {});

  /// Advances one accepted step, never past `t_end` (measured along `direction`).
  void step(double t_end);
  /// Integrates to t_end exactly.
  void advance_to(double t_end);

  double t() const { return t_; }
  const Vec& y() const { return y_; }
  double last_t0() const { return t0_; }
  const Vec& last_y0() const { return y0_; }
  double last_h() const { return t_ - t0_; }
  long steps() const { return steps_; }

  /// Dense output inside the last accepted step.
  Vec dense(double t) const;
  /// One full 5th-order step of size h from state y (no error control).
  Vec single_step(const Vec& y, double h) const;
  const Rhs& rhs() const { return rhs_; }

private:
  Vec attempt(const Vec& y, double h, std::array<Vec, 7>& k, Vec& err) const;
  void initial_step();

  Rhs rhs_;
  IntegratorOptions opts_;
  double dir_;
  double t_ = 0.0, t0_ = 0.0, h_ = 0.0;
  Vec y_, y0_;
  Vec k1_;
  std::array<Vec, 5> cont_;
  long steps_ = 0;
};

struct FlowRequest {
  Vec coefficients;
  PhaseVector start;
  double duration = 0.0;
  Tolerances tol;
  double escape_radius = 1e4;
};

struct FlowTrace {
  PhaseVector end;
  /// Max over accepted steps of |f_j(p(t)) - f_j(p(0))| / (1 + |f_j(p(0))|).
  double max_relative_drift = 0.0;
  long steps = 0;
};

inline constexpr double kTolConserve = 1e-8;

/// Endpoint of the flow of sum_i alpha_i f_i.
PhaseVector flow(const HamiltonianSystem& sys, const FlowRequest& req);
FlowTrace flow_trace(const HamiltonianSystem& sys, const FlowRequest& req);

/// Flow of the joint Hamiltonian with coefficient vector `times` for unit time;
/// by commutation equals the composition of the individual flows.
PhaseVector joint_flow(const HamiltonianSystem& sys, const Vec& times, const PhaseVector& p,
                       Tolerances tol = {});

/// Action of the periodic-flagged components (excluding `skip`) as a torus.
class TorusAction {
public:
  TorusAction(const HamiltonianSystem& sys, int skip, Tolerances tol = {});

  int rank() const { return static_cast<int>(generators_.size()); }
  const std::vector<int>& generators() const { return generators_; }
  PhaseVector act(const std::vector<double>& angles, const PhaseVector& p) const;

  struct Projection {
    std::vector<double> angles;  // q ~ act(angles, anchor)
    PhaseVector point;
    Vec difference;              // wrapped q - point
    double distance = 0.0;
  };
  Projection project(const PhaseVector& q, const PhaseVector& anchor) const;
  /// Largest distance from `anchor` to points of its orbit (sampled).
  double diameter(const PhaseVector& anchor) const;

private:
  PhaseVector act_one(int generator_slot, double angle, const PhaseVector& p) const;

  const HamiltonianSystem* sys_;
  std::vector<int> generators_;
  Tolerances tol_;
};

struct HitResult {
  double time = 0.0;
  PhaseVector point;
  double residual = 0.0;
  /// point ~ act(orbit_angles, anchor) for the torus generators.
  std::vector<double> orbit_angles;
};

struct HitOptions {
  Tolerances tol;
  double t_max = 1e3;
  /// Root tolerance in time for the refined hit.
  double tol_time = 1e-13;
  /// Residual below which a refined distance minimum is a genuine hit.
  double tol_hit = 1e-9;
  double escape_radius = 1e4;
  /// Exit-ball radius as a fraction of the orbit diameter.
  double exit_fraction = 0.1;
};

inline constexpr double kTolLeaf = 1e-8;

/// First time t >= t_min at which the f_generator trajectory from `start`
/// meets the torus orbit of `anchor`. Without t_min, the departure hit is
/// excluded by waiting until the trajectory leaves the ball of radius
/// exit_fraction * diameter around the orbit.
HitResult first_hit_torus_orbit(const HamiltonianSystem& sys, int generator, const PhaseVector& start,
                                const PhaseVector& anchor, std::optional<double> t_min = std::nullopt,
                                const HitOptions& opts = {});

struct OrbitClosure {
  /// One entry per system component; the generator's slot is 0.
  Vec times;
  double residual = 0.0;
};

/// Times in [0, 2*pi) for the periodic components mapping `from` onto `to`.
OrbitClosure close_orbit_times(const HamiltonianSystem& sys, int generator, const PhaseVector& from,
                               const PhaseVector& to, Tolerances tol = {}, double tol_on_orbit = 1e-7);

}  // namespace semitoric
