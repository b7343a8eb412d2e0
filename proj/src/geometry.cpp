#include "semitoric/geometry.hpp"

#include "semitoric/errors.hpp"

#include <cmath>
#include <limits>
#include <numbers>

namespace semitoric {

void HamiltonianSystem::validate() const {
  if (n < 1) throw Error(ErrorKind::InvalidArgument, "system needs n >= 1");
  if (static_cast<int>(components.size()) != n)
    throw Error(ErrorKind::DimensionMismatch, "system has " + std::to_string(components.size()) +
                                                  " components for n = " + std::to_string(n));
  if (static_cast<int>(periodic.size()) != n)
    throw Error(ErrorKind::DimensionMismatch, "periodic flags do not match n");
  for (int j : angle_coords)
    if (j < 0 || j >= n) throw Error(ErrorKind::InvalidArgument, "angle coordinate out of range");
  for (const auto& f : components)
    if (!f.evaluate) throw Error(ErrorKind::InvalidArgument, "component without evaluate()");
}

void require_dim(const PhaseVector& p, int dim, const char* where) {
  if (p.size() != dim)
    throw Error(ErrorKind::DimensionMismatch, std::string(where) + ": expected dimension " +
                                                  std::to_string(dim) + ", got " +
                                                  std::to_string(p.size()));
}

void require_finite(const Vec& v, const char* where) {
  if (!v.allFinite()) throw Error(ErrorKind::NonFinite, where);
}

double fd_step(double coordinate) {
  static const double h0 = std::cbrt(std::numeric_limits<double>::epsilon());
  return h0 * std::max(1.0, std::abs(coordinate));
}

Vec fd_gradient(const ScalarField& f, const PhaseVector& p) {
  Vec g(p.size());
  PhaseVector q = p;
  for (Eigen::Index i = 0; i < p.size(); ++i) {
    const double h = fd_step(p[i]);
    q[i] = p[i] + h;
    const double fp = f.evaluate(q);
    q[i] = p[i] - h;
    const double fm = f.evaluate(q);
    q[i] = p[i];
    g[i] = (fp - fm) / (2.0 * h);
  }
  return g;
}

Vec gradient_of(const ScalarField& f, const PhaseVector& p) {
  Vec g = f.gradient ? f.gradient(p) : fd_gradient(f, p);
  require_finite(g, "gradient");
  return g;
}

Mat fd_hessian(const ScalarField& f, const PhaseVector& p) {
  const auto d = p.size();
  Mat h(d, d);
  PhaseVector q = p;
  if (f.gradient) {
    for (Eigen::Index j = 0; j < d; ++j) {
      const double s = fd_step(p[j]);
      q[j] = p[j] + s;
      const Vec gp = f.gradient(q);
      q[j] = p[j] - s;
      const Vec gm = f.gradient(q);
      q[j] = p[j];
      h.col(j) = (gp - gm) / (2.0 * s);
    }
  } else {
    // Second differences of values want a larger step than first differences.
    static const double h0 = std::pow(std::numeric_limits<double>::epsilon(), 0.25);
    const double f0 = f.evaluate(p);
    for (Eigen::Index i = 0; i < d; ++i) {
      const double si = h0 * std::max(1.0, std::abs(p[i]));
      q[i] = p[i] + si;
      const double fp = f.evaluate(q);
      q[i] = p[i] - si;
      const double fm = f.evaluate(q);
      q[i] = p[i];
      h(i, i) = (fp - 2.0 * f0 + fm) / (si * si);
      for (Eigen::Index j = i + 1; j < d; ++j) {
        const double sj = h0 * std::max(1.0, std::abs(p[j]));
        double acc = 0.0;
        for (int a : {1, -1})
          for (int b : {1, -1}) {
            q[i] = p[i] + a * si;
            q[j] = p[j] + b * sj;
            acc += a * b * f.evaluate(q);
          }
        q[i] = p[i];
        q[j] = p[j];
        h(i, j) = h(j, i) = acc / (4.0 * si * sj);
      }
    }
  }
  return 0.5 * (h + h.transpose());
}

Mat hessian_at(const ScalarField& f, const PhaseVector& p) {
  Mat h = f.hessian ? f.hessian(p) : fd_hessian(f, p);
  if (!h.allFinite()) throw Error(ErrorKind::NonFinite, "hessian");
  return 0.5 * (h + h.transpose());
}

double poisson_bracket(const ScalarField& f, const ScalarField& g, const PhaseVector& p) {
  if (p.size() % 2 != 0) throw Error(ErrorKind::DimensionMismatch, "odd phase dimension");
  const auto n = p.size() / 2;
  const Vec df = gradient_of(f, p);
  const Vec dg = gradient_of(g, p);
  if (df.size() != p.size() || dg.size() != p.size())
    throw Error(ErrorKind::DimensionMismatch, "poisson_bracket: gradient size");
  return df.head(n).dot(dg.tail(n)) - df.tail(n).dot(dg.head(n));
}

Vec ham_vector_field(const ScalarField& f, const PhaseVector& p) {
  const auto n = p.size() / 2;
  const Vec g = gradient_of(f, p);
  Vec x(p.size());
  x.head(n) = -g.tail(n);
  x.tail(n) = g.head(n);
  return x;
}

Mat hamiltonian_operator(int n) {
  Mat k = Mat::Zero(2 * n, 2 * n);
  k.topRightCorner(n, n) = -Mat::Identity(n, n);
  k.bottomLeftCorner(n, n) = Mat::Identity(n, n);
  return k;
}

Mat symplectic_gram(int n) { return hamiltonian_operator(n); }

Vec moment_map(const HamiltonianSystem& sys, const PhaseVector& p) {
  require_dim(p, sys.dim(), "moment_map");
  Vec v(sys.n);
  for (int i = 0; i < sys.n; ++i) v[i] = sys.components[i].evaluate(p);
  require_finite(v, "moment map value");
  return v;
}

Mat moment_jacobian(const HamiltonianSystem& sys, const PhaseVector& p) {
  require_dim(p, sys.dim(), "moment_jacobian");
  Mat j(sys.n, sys.dim());
  for (int i = 0; i < sys.n; ++i) j.row(i) = gradient_of(sys.components[i], p).transpose();
  return j;
}

Vec joint_vector_field(const HamiltonianSystem& sys, const Vec& coeffs, const PhaseVector& p) {
  const int n = sys.n;
  Vec g = Vec::Zero(2 * n);
  for (int i = 0; i < n; ++i)
    if (coeffs[i] != 0.0) g += coeffs[i] * gradient_of(sys.components[i], p);
  Vec x(2 * n);
  x.head(n) = -g.tail(n);
  x.tail(n) = g.head(n);
  return x;
}

double wrap_angle(double a) {
  constexpr double two_pi = 2.0 * std::numbers::pi;
  double r = std::remainder(a, two_pi);
  if (r <= -std::numbers::pi) r += two_pi;
  return r;
}

Vec phase_difference(const HamiltonianSystem& sys, const PhaseVector& a, const PhaseVector& b) {
  Vec d = a - b;
  for (int j : sys.angle_coords) d[j] = wrap_angle(d[j]);
  return d;
}

double phase_distance(const HamiltonianSystem& sys, const PhaseVector& a, const PhaseVector& b) {
  return phase_difference(sys, a, b).norm();
}

double max_bracket_defect(const HamiltonianSystem& sys, const std::vector<PhaseVector>& points) {
  double worst = 0.0;
  for (const auto& p : points)
    for (int i = 0; i < sys.n; ++i)
      for (int j = i + 1; j < sys.n; ++j)
        worst = std::max(worst, std::abs(poisson_bracket(sys.components[i], sys.components[j], p)));
  return worst;
}

std::vector<PhaseVector> random_points(int dim, int count, double radius, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-radius, radius);
  std::vector<PhaseVector> pts;
  pts.reserve(count);
  for (int k = 0; k < count; ++k) {
    PhaseVector p(dim);
    for (int i = 0; i < dim; ++i) p[i] = u(rng);
    pts.push_back(std::move(p));
  }
  return pts;
}

}  // namespace semitoric
