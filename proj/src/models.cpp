#include "semitoric/models.hpp"

#include "semitoric/errors.hpp"

#include <unsupported/Eigen/MatrixFunctions>

#include <cmath>
#include <complex>
#include <memory>
#include <numbers>

namespace semitoric {

int degrees_of_freedom(const std::vector<BlockSpec>& blocks) {
  int n = 0;
  for (const auto& b : blocks) {
    if (b.multiplicity < 0) throw Error(ErrorKind::InvalidArgument, "negative block multiplicity");
    n += (b.kind == BlockKind::FocusFocus ? 2 : 1) * b.multiplicity;
  }
  return n;
}

const char* to_string(BlockKind kind) {
  switch (kind) {
    case BlockKind::Elliptic: return "elliptic";
    case BlockKind::Hyperbolic: return "hyperbolic";
    case BlockKind::FocusFocus: return "focusfocus";
    case BlockKind::Transverse: return "transverse";
  }
  return "?";
}

BlockKind block_kind_from_string(const std::string& s) {
  if (s == "elliptic" || s == "E") return BlockKind::Elliptic;
  if (s == "hyperbolic" || s == "H") return BlockKind::Hyperbolic;
  if (s == "focusfocus" || s == "FF") return BlockKind::FocusFocus;
  if (s == "transverse" || s == "X") return BlockKind::Transverse;
  throw Error(ErrorKind::Config, "unknown block kind '" + s + "'");
}

ReparamMap linear_reparam(const Mat& a) {
  if (a.rows() != a.cols()) throw Error(ErrorKind::DimensionMismatch, "reparam matrix not square");
  ReparamMap g;
  g.forward = [a](const Vec& v) { return Vec(a * v); };
  g.jacobian = [a](const Vec&) { return a; };
  g.second = [a](const Vec&) { return std::vector<Mat>(a.rows(), Mat::Zero(a.rows(), a.rows())); };
  g.passthrough.assign(a.rows(), -1);
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    Eigen::Index j;
    const double mx = a.row(i).cwiseAbs().maxCoeff(&j);
    if (a(i, j) == 1.0 && a.row(i).cwiseAbs().sum() == mx) g.passthrough[i] = static_cast<int>(j);
  }
  return g;
}

ReparamMap identity_reparam(int n) { return linear_reparam(Mat::Identity(n, n)); }

ScalarField quadratic_field(const Mat& q, const Vec& b) {
  const Mat qs = 0.5 * (q + q.transpose());
  const int n = static_cast<int>(qs.rows()) / 2;
  const Mat k = hamiltonian_operator(n);
  ScalarField f;
  f.evaluate = [qs, b](const PhaseVector& p) { return 0.5 * p.dot(qs * p) + b.dot(p); };
  f.gradient = [qs, b](const PhaseVector& p) { return Vec(qs * p + b); };
  f.hessian = [qs](const PhaseVector&) { return qs; };
  if (b.isZero(0.0)) {
    const Mat a = k * qs;
    f.exact_flow = [a](const PhaseVector& p, double t) { return Vec((a * t).exp() * p); };
  } else if (qs.isZero(0.0)) {
    const Vec v = k * b;
    f.exact_flow = [v](const PhaseVector& p, double t) { return Vec(p + t * v); };
  }
  return f;
}

HamiltonianSystem q_model(const std::vector<BlockSpec>& blocks) {
  const int n = degrees_of_freedom(blocks);
  if (n < 1) throw Error(ErrorKind::InvalidArgument, "q_model: empty block list");
  HamiltonianSystem sys;
  sys.n = n;
  sys.name = "q_model";
  const int d = 2 * n;
  auto count = [&](BlockKind kind) {
    int c = 0;
    for (const auto& b : blocks)
      if (b.kind == kind) c += b.multiplicity;
    return c;
  };
  auto add = [&](Mat q, Vec b, bool periodic) {
    sys.components.push_back(quadratic_field(q, b));
    sys.periodic.push_back(periodic);
  };
  const Vec zero = Vec::Zero(d);
  int pos = 0;
  // Hessian entries: f = 1/2 p^T Q p, so a product x*xi needs Q(x, xi) = Q(xi, x) = 1.
  for (int k = 0; k < count(BlockKind::FocusFocus); ++k, pos += 2) {
    const int a = pos, b = pos + 1;
    Mat q1 = Mat::Zero(d, d);
    q1(a, n + a) = q1(n + a, a) = 1.0;
    q1(b, n + b) = q1(n + b, b) = 1.0;
    Mat q2 = Mat::Zero(d, d);
    q2(a, n + b) = q2(n + b, a) = 1.0;
    q2(b, n + a) = q2(n + a, b) = -1.0;
    add(q1, zero, false);
    add(q2, zero, true);
  }
  for (int k = 0; k < count(BlockKind::Elliptic); ++k, ++pos) {
    Mat q = Mat::Zero(d, d);
    q(pos, pos) = q(n + pos, n + pos) = 2.0;
    add(q, zero, true);
  }
  for (int k = 0; k < count(BlockKind::Hyperbolic); ++k, ++pos) {
    Mat q = Mat::Zero(d, d);
    q(pos, n + pos) = q(n + pos, pos) = 1.0;
    add(q, zero, false);
  }
  for (int k = 0; k < count(BlockKind::Transverse); ++k, ++pos) {
    Vec b = zero;
    b[n + pos] = 1.0;
    add(Mat::Zero(d, d), b, true);
    sys.angle_coords.push_back(pos);
  }
  sys.validate();
  return sys;
}

HamiltonianSystem champagne_bottle() {
  HamiltonianSystem sys;
  sys.n = 2;
  sys.name = "champagne_bottle";
  ScalarField h;
  h.evaluate = [](const PhaseVector& p) {
    const double r2 = p[0] * p[0] + p[1] * p[1];
    return 0.5 * (p[2] * p[2] + p[3] * p[3]) + r2 * r2 - r2;
  };
  h.gradient = [](const PhaseVector& p) {
    const double r2 = p[0] * p[0] + p[1] * p[1];
    const double c = 4.0 * r2 - 2.0;
    Vec g(4);
    g << c * p[0], c * p[1], p[2], p[3];
    return g;
  };
  h.hessian = [](const PhaseVector& p) {
    const double r2 = p[0] * p[0] + p[1] * p[1];
    Mat m = Mat::Zero(4, 4);
    m(0, 0) = 4.0 * r2 - 2.0 + 8.0 * p[0] * p[0];
    m(1, 1) = 4.0 * r2 - 2.0 + 8.0 * p[1] * p[1];
    m(0, 1) = m(1, 0) = 8.0 * p[0] * p[1];
    m(2, 2) = m(3, 3) = 1.0;
    return m;
  };
  Mat qj = Mat::Zero(4, 4);
  qj(0, 3) = qj(3, 0) = 1.0;
  qj(1, 2) = qj(2, 1) = -1.0;
  ScalarField j = quadratic_field(qj, Vec::Zero(4));
  // J rotates (x1, x2) and (xi1, xi2) together; closed form avoids expm.
  j.exact_flow = [](const PhaseVector& p, double t) {
    const double c = std::cos(t), s = std::sin(t);
    Vec q(4);
    q << c * p[0] + s * p[1], -s * p[0] + c * p[1], c * p[2] + s * p[3], -s * p[2] + c * p[3];
    return q;
  };
  sys.components = {h, j};
  sys.periodic = {false, true};
  sys.validate();
  return sys;
}

std::array<double, 6> vanishing_action(double h, double j) {
  // u sqrt(1 + eps) with eps = -u + H/u - J^2/(2u^2) has sqrt(P) = sqrt2 u sqrt(1 + eps);
  // the contour mean of u sqrt(1 + eps) is the 1/u Laurent coefficient.
  constexpr int kNodes = 48;
  constexpr double kRho = 0.4;
  std::array<std::complex<double>, 6> acc{};
  for (int k = 0; k < kNodes; ++k) {
    const std::complex<double> u = std::polar(kRho, 2.0 * std::numbers::pi * (k + 0.5) / kNodes);
    const std::complex<double> eps = -u + h / u - 0.5 * j * j / (u * u);
    if (std::abs(eps) >= 0.95) throw Error(ErrorKind::InvalidArgument, "vanishing_action: value too far from 0");
    const std::complex<double> s = std::sqrt(1.0 + eps), s3 = s * s * s;
    acc[0] += u * s;
    acc[1] += 0.5 / s;
    acc[2] += -j / (2.0 * u * s);
    acc[3] += -1.0 / (4.0 * s3 * u);
    acc[4] += j / (4.0 * s3 * u * u);
    acc[5] += -1.0 / (2.0 * u * s) - j * j / (4.0 * u * u * u * s3);
  }
  std::array<double, 6> out;
  for (int i = 0; i < 6; ++i) out[i] = std::numbers::sqrt2 * acc[i].real() / kNodes;
  return out;
}

HamiltonianSystem normalized_champagne_bottle() {
  ReparamMap g;
  g.forward = [](const Vec& v) {
    Vec out(2);
    out << vanishing_action(v[0], v[1])[0], v[1];
    return out;
  };
  g.jacobian = [](const Vec& v) {
    const auto a = vanishing_action(v[0], v[1]);
    Mat m(2, 2);
    m << a[1], a[2], 0.0, 1.0;
    return m;
  };
  g.second = [](const Vec& v) {
    const auto a = vanishing_action(v[0], v[1]);
    std::vector<Mat> hs(2, Mat::Zero(2, 2));
    hs[0] << a[3], a[4], a[4], a[5];
    return hs;
  };
  g.passthrough = {-1, 1};
  auto sys = reparametrize(champagne_bottle(), g);
  sys.name = "champagne_bottle_normalized";
  return sys;
}

namespace {

// Index maps between an n-system and its (n+k)-extension.
struct Embedding {
  int n, k;
  PhaseVector restrict(const PhaseVector& p) const {
    PhaseVector q(2 * n);
    q.head(n) = p.head(n);
    q.tail(n) = p.segment(n + k, n);
    return q;
  }
  Vec extend(const Vec& g) const {
    Vec out = Vec::Zero(2 * (n + k));
    out.head(n) = g.head(n);
    out.segment(n + k, n) = g.tail(n);
    return out;
  }
  Mat extend(const Mat& h) const {
    const int m = n + k;
    std::vector<int> idx(2 * n);
    for (int i = 0; i < n; ++i) {
      idx[i] = i;
      idx[n + i] = m + i;
    }
    Mat out = Mat::Zero(2 * m, 2 * m);
    for (int i = 0; i < 2 * n; ++i)
      for (int j = 0; j < 2 * n; ++j) out(idx[i], idx[j]) = h(i, j);
    return out;
  }
};

}  // namespace

HamiltonianSystem product_with_free_torus(const HamiltonianSystem& sys, int k) {
  sys.validate();
  if (k < 0) throw Error(ErrorKind::InvalidArgument, "negative torus dimension");
  if (k == 0) return sys;
  const int n = sys.n, m = n + k;
  const Embedding e{n, k};
  HamiltonianSystem out;
  out.n = m;
  out.name = sys.name + "_x_T" + std::to_string(k);
  out.angle_coords = sys.angle_coords;
  for (int i = 0; i < n; ++i) {
    const ScalarField f = sys.components[i];
    ScalarField g;
    g.evaluate = [f, e](const PhaseVector& p) { return f.evaluate(e.restrict(p)); };
    g.gradient = [f, e](const PhaseVector& p) { return e.extend(gradient_of(f, e.restrict(p))); };
    g.hessian = [f, e](const PhaseVector& p) { return e.extend(hessian_at(f, e.restrict(p))); };
    if (f.exact_flow)
      g.exact_flow = [f, e](const PhaseVector& p, double t) {
        PhaseVector q = p;
        const PhaseVector r = f.exact_flow(e.restrict(p), t);
        q.head(e.n) = r.head(e.n);
        q.segment(e.n + e.k, e.n) = r.tail(e.n);
        return q;
      };
    out.components.push_back(g);
    out.periodic.push_back(sys.periodic[i]);
  }
  for (int j = 0; j < k; ++j) {
    Vec b = Vec::Zero(2 * m);
    b[m + n + j] = 1.0;
    out.components.push_back(quadratic_field(Mat::Zero(2 * m, 2 * m), b));
    out.periodic.push_back(true);
    out.angle_coords.push_back(n + j);
  }
  out.validate();
  return out;
}

HamiltonianSystem reparametrize(const HamiltonianSystem& sys, const ReparamMap& g) {
  sys.validate();
  const int n = sys.n;
  const Mat j0 = g.jacobian(Vec::Zero(n));
  if (j0.rows() != n || j0.cols() != n)
    throw Error(ErrorKind::DimensionMismatch, "reparam jacobian size");
  Eigen::JacobiSVD<Mat> svd(j0);
  const Vec sv = svd.singularValues();
  if (!(sv[n - 1] > 0.0) || sv[0] / sv[n - 1] > kReparamCondMax)
    throw Error(ErrorKind::IllConditioned, "reparametrization jacobian is singular at 0");

  HamiltonianSystem out;
  out.n = n;
  out.name = sys.name + "_reparam";
  out.angle_coords = sys.angle_coords;
  const auto base = std::make_shared<HamiltonianSystem>(sys);
  for (int i = 0; i < n; ++i) {
    ScalarField f;
    f.evaluate = [base, g, i](const PhaseVector& p) { return g.forward(moment_map(*base, p))[i]; };
    f.gradient = [base, g, i](const PhaseVector& p) {
      const Mat dg = g.jacobian(moment_map(*base, p));
      return Vec(moment_jacobian(*base, p).transpose() * dg.row(i).transpose());
    };
    // without second derivatives of g, Hessians come from differencing the gradient
    if (g.second)
      f.hessian = [base, g, i](const PhaseVector& p) {
        const Vec v = moment_map(*base, p);
        const Mat dg = g.jacobian(v);
        const Mat df = moment_jacobian(*base, p);
        Mat h = df.transpose() * g.second(v)[i] * df;
        for (int j = 0; j < base->n; ++j)
          if (dg(i, j) != 0.0) h += dg(i, j) * hessian_at(base->components[j], p);
        return h;
      };
    const int pass = i < static_cast<int>(g.passthrough.size()) ? g.passthrough[i] : -1;
    out.periodic.push_back(pass >= 0 && sys.periodic[pass]);
    if (pass >= 0) f.exact_flow = sys.components[pass].exact_flow;
    out.components.push_back(f);
  }
  out.validate();
  return out;
}

HamiltonianSystem symplectic_change(const HamiltonianSystem& sys, const Mat& s) {
  sys.validate();
  if (s.rows() != sys.dim() || s.cols() != sys.dim())
    throw Error(ErrorKind::DimensionMismatch, "symplectic matrix size");
  const Mat sinv = s.inverse();
  HamiltonianSystem out;
  out.n = sys.n;
  out.name = sys.name + "_symplectic";
  for (int i = 0; i < sys.n; ++i) {
    const ScalarField f = sys.components[i];
    ScalarField g;
    g.evaluate = [f, s](const PhaseVector& q) { return f.evaluate(s * q); };
    g.gradient = [f, s](const PhaseVector& q) { return Vec(s.transpose() * gradient_of(f, s * q)); };
    g.hessian = [f, s](const PhaseVector& q) { return Mat(s.transpose() * hessian_at(f, s * q) * s); };
    if (f.exact_flow)
      g.exact_flow = [f, s, sinv](const PhaseVector& q, double t) {
        return Vec(sinv * f.exact_flow(s * q, t));
      };
    out.components.push_back(g);
    out.periodic.push_back(sys.periodic[i]);
  }
  out.validate();
  return out;
}

Mat random_symplectic(int n, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-0.5, 0.5);
  auto random_sym = [&]() {
    Mat b(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) b(i, j) = u(rng);
    return Mat(0.5 * (b + b.transpose()));
  };
  Mat a = Mat::Identity(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) a(i, j) += u(rng);
  const int d = 2 * n;
  Mat diag = Mat::Zero(d, d);
  diag.topLeftCorner(n, n) = a;
  diag.bottomRightCorner(n, n) = a.inverse().transpose();
  Mat upper = Mat::Identity(d, d);
  upper.topRightCorner(n, n) = random_sym();
  Mat lower = Mat::Identity(d, d);
  lower.bottomLeftCorner(n, n) = random_sym();
  return diag * upper * lower;
}

}  // namespace semitoric
