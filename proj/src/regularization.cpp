#include "semitoric/regularization.hpp"

#include <Eigen/SVD>

#include <cmath>
#include <numbers>

namespace semitoric {

namespace {
constexpr double kTwoPi = 2.0 * std::numbers::pi;

double mod_two_pi(double a) {
  double r = std::fmod(a, kTwoPi);
  if (r < 0.0) r += kTwoPi;
  return r;
}
}  // namespace

SigmaSample sigma_from_periods(const PeriodBasis& basis, const LogBranch& branch) {
  const Eigen::Index n = basis.rows.rows();
  if (n < 2) throw Error(ErrorKind::InvalidArgument, "sigma needs at least two components");
  const std::complex<double> w = basis.at.w;
  if (w == 0.0) throw Error(ErrorKind::NotRegular, "w = 0 is the critical value");
  if (branch.on_cut(w)) throw Error(ErrorKind::BranchCut, "w lies on the branch cut");
  const std::complex<double> lw = branch.log(w);
  SigmaSample s;
  s.at = basis.at;
  s.sigma = basis.tau();
  s.sigma[0] += lw.real();
  s.sigma[1] = mod_two_pi(s.sigma[1] - lw.imag());
  for (Eigen::Index j = 2; j < n; ++j) s.sigma[j] = mod_two_pi(s.sigma[j]);
  return s;
}

double lift_near(double value, double reference) {
  return value + kTwoPi * std::round((reference - value) / kTwoPi);
}

Vec linspace(double a, double b, int count) {
  if (count < 1) throw Error(ErrorKind::InvalidArgument, "axis needs at least one node");
  if (count == 1) return Vec::Constant(1, a);
  return Vec::LinSpaced(count, a, b);
}

void lift_grid(SigmaGrid& grid) {
  const int m1 = grid.size1(), m2 = grid.size2();
  if (grid.samples.size() != static_cast<std::size_t>(m1) * m2)
    throw Error(ErrorKind::DimensionMismatch, "sigma grid sample count");
  if (grid.samples.empty()) return;
  const Eigen::Index n = grid.samples.front().sigma.size();
  auto lift_from = [n](SigmaSample& s, const SigmaSample& ref) {
    for (Eigen::Index k = 1; k < n; ++k) s.sigma[k] = lift_near(s.sigma[k], ref.sigma[k]);
  };
  for (int i = 1; i < m1; ++i) lift_from(grid.at(i, 0), grid.at(i - 1, 0));
  for (int i = 0; i < m1; ++i)
    for (int j = 1; j < m2; ++j) lift_from(grid.at(i, j), grid.at(i, j - 1));
}

SigmaGrid sigma_grid(const HamiltonianSystem& sys, const Vec& axis1, const Vec& axis2, const Vec& rest,
                     const PhaseVector& anchor_seed, const SigmaGridOptions& opts) {
  if (sys.n < 2) throw Error(ErrorKind::InvalidArgument, "sigma grid needs n >= 2");
  if (rest.size() != sys.n - 2) throw Error(ErrorKind::DimensionMismatch, "sigma grid: fixed values");
  SigmaGrid grid;
  grid.axis1 = axis1;
  grid.axis2 = axis2;
  grid.rest = rest;
  std::vector<RegularValue> values;
  for (Eigen::Index i = 0; i < axis1.size(); ++i)
    for (Eigen::Index j = 0; j < axis2.size(); ++j) {
      Vec v(sys.n);
      v << axis1[i], axis2[j], rest;
      values.emplace_back(v);
    }
  const auto entries = period_grid(sys, values, anchor_seed, opts.grid);
  for (const auto& e : entries) {
    if (!e.basis) throw Error(*e.error, e.message);
    grid.samples.push_back(sigma_from_periods(*e.basis, opts.branch));
  }
  lift_grid(grid);
  return grid;
}

Mat closedness_field(const SigmaGrid& grid) {
  const int m1 = grid.size1(), m2 = grid.size2();
  if (m1 < 3 || m2 < 3) throw Error(ErrorKind::InvalidArgument, "closedness needs at least 3 nodes per axis");
  if (grid.samples.size() != static_cast<std::size_t>(m1) * m2)
    throw Error(ErrorKind::DimensionMismatch, "sigma grid sample count");
  Mat out = Mat::Zero(m1, m2);
  for (int i = 1; i + 1 < m1; ++i)
    for (int j = 1; j + 1 < m2; ++j) {
      const double d1s2 =
          (grid.at(i + 1, j).sigma[1] - grid.at(i - 1, j).sigma[1]) / (grid.axis1[i + 1] - grid.axis1[i - 1]);
      const double d2s1 =
          (grid.at(i, j + 1).sigma[0] - grid.at(i, j - 1).sigma[0]) / (grid.axis2[j + 1] - grid.axis2[j - 1]);
      out(i, j) = std::abs(d1s2 - d2s1);
    }
  return out;
}

double closedness_defect(const SigmaGrid& grid) { return closedness_field(grid).maxCoeff(); }

namespace {

using Point = Eigen::Vector2d;

double cross(const Point& a, const Point& b) { return a.x() * b.y() - a.y() * b.x(); }

// Whether the closed segment a-b meets the cut ray {r e^{i cut}, r > 0}.
bool crosses_cut(const Point& a, const Point& b, const LogBranch& branch) {
  const Point d(std::cos(branch.cut_angle), std::sin(branch.cut_angle));
  const double ca = cross(d, a), cb = cross(d, b);
  if (ca * cb > 0.0) return false;
  if (ca == cb) return a.dot(d) > 0.0 || b.dot(d) > 0.0;  // collinear with the cut line
  const double u = ca / (ca - cb);
  return (a + u * (b - a)).dot(d) > 0.0;
}

double segment_integral(const Vec& sa, const Vec& sb, const Point& a, const Point& b) {
  const Point d = b - a;
  return 0.5 * ((sa[0] + sb[0]) * d.x() + (sa[1] + sb[1]) * d.y());
}

}  // namespace

SField integrate_S(const SigmaGrid& grid, const SigmaSampler& sampler, int base_j, const IntegrateOptions& opts) {
  const int m1 = grid.size1(), m2 = grid.size2();
  if (m1 < 1 || m2 < 1 || grid.samples.size() != static_cast<std::size_t>(m1) * m2)
    throw Error(ErrorKind::DimensionMismatch, "sigma grid sample count");
  if (base_j < 0 || base_j >= m2) throw Error(ErrorKind::InvalidArgument, "base node out of range");
  if (opts.ray_panels < 1) throw Error(ErrorKind::InvalidArgument, "ray needs at least one panel");
  const Point base(grid.axis1[0], grid.axis2[base_j]);
  if (base.norm() == 0.0) throw Error(ErrorKind::InvalidArgument, "base node sits at the critical value");

  auto node = [&](int i, int j) { return Point(grid.axis1[i], grid.axis2[j]); };
  auto check = [&](const Point& a, const Point& b) {
    if (crosses_cut(a, b, opts.branch))
      throw Error(ErrorKind::Winding, "integration path crosses the logarithm branch cut");
  };
  check(Point::Zero(), base);
  for (int i = 0; i + 1 < m1; ++i)
    for (int j = 0; j < m2; ++j) check(node(i, j), node(i + 1, j));
  for (int i = 0; i < m1; ++i)
    for (int j = 0; j + 1 < m2; ++j) check(node(i, j), node(i, j + 1));

  // Ray from 0 to the base node, sampled from the base backwards so the lift
  // follows the grid's determination.
  auto value_at = [&](double t) {
    Vec v(2 + grid.rest.size());
    v << t * base.x(), t * base.y(), grid.rest;
    return v;
  };
  const int m = opts.ray_panels;
  std::vector<Vec> ray(m + 1);
  ray[m] = grid.at(0, base_j).sigma;
  auto lifted = [&](double t, const Vec& ref) {
    Vec s = sampler(value_at(t)).sigma;
    for (Eigen::Index k = 1; k < s.size(); ++k) s[k] = lift_near(s[k], ref[k]);
    return s;
  };
  for (int k = m - 1; k >= 1; --k) ray[k] = lifted(static_cast<double>(k) / m, ray[k + 1]);
  const double t1 = 1.0 / m;
  const Vec half = lifted(t1 / 2, ray[1]);
  const Vec quarter = lifted(t1 / 4, half);
  ray[0] = (8.0 * quarter - 6.0 * half + ray[1]) / 3.0;

  double s_base = 0.0;
  for (int k = 0; k < m; ++k)
    s_base += segment_integral(ray[k], ray[k + 1], static_cast<double>(k) / m * base,
                               static_cast<double>(k + 1) / m * base);

  auto edge = [&](int i0, int j0, int i1, int j1) {
    return segment_integral(grid.at(i0, j0).sigma, grid.at(i1, j1).sigma, node(i0, j0), node(i1, j1));
  };
  // Along axis2 on the first column, and along axis1 on the base row.
  Vec col0(m2), row_base(m1);
  col0[base_j] = s_base;
  for (int j = base_j + 1; j < m2; ++j) col0[j] = col0[j - 1] + edge(0, j - 1, 0, j);
  for (int j = base_j - 1; j >= 0; --j) col0[j] = col0[j + 1] + edge(0, j + 1, 0, j);
  row_base[0] = s_base;
  for (int i = 1; i < m1; ++i) row_base[i] = row_base[i - 1] + edge(i - 1, base_j, i, base_j);

  SField out;
  out.axis1 = grid.axis1;
  out.axis2 = grid.axis2;
  out.sigma_origin = ray[0];
  out.values.resize(m1, m2);
  Mat other(m1, m2);
  for (int j = 0; j < m2; ++j) {
    other(0, j) = col0[j];
    for (int i = 1; i < m1; ++i) other(i, j) = other(i - 1, j) + edge(i - 1, j, i, j);
  }
  for (int i = 0; i < m1; ++i) {
    out.values(i, base_j) = row_base[i];
    for (int j = base_j + 1; j < m2; ++j) out.values(i, j) = out.values(i, j - 1) + edge(i, j - 1, i, j);
    for (int j = base_j - 1; j >= 0; --j) out.values(i, j) = out.values(i, j + 1) + edge(i, j + 1, i, j);
  }
  out.path_residual = (out.values - other).cwiseAbs().maxCoeff();
  if (out.path_residual > opts.tol_path)
    throw Error(ErrorKind::PathDisagreement,
                "S differs between integration paths by " + std::to_string(out.path_residual));
  return out;
}

TaylorFit taylor_fit(const std::vector<Vec>& nodes, const Vec& values, int degree) {
  if (degree < 0) throw Error(ErrorKind::InvalidArgument, "negative Taylor degree");
  if (static_cast<Eigen::Index>(nodes.size()) != values.size())
    throw Error(ErrorKind::DimensionMismatch, "taylor_fit: node and value counts differ");
  TaylorFit fit;
  fit.degree = degree;
  std::vector<std::pair<int, int>> powers;
  for (int d = 1; d <= degree; ++d)
    for (int a = d; a >= 0; --a) powers.emplace_back(a, d - a);
  const Eigen::Index rows = values.size(), cols = static_cast<Eigen::Index>(powers.size());
  if (cols == 0) {
    fit.residual = rows ? std::sqrt(values.squaredNorm() / rows) : 0.0;
    return fit;
  }
  if (rows < cols) throw Error(ErrorKind::IllConditioned, "fewer samples than Taylor coefficients");
  Mat a(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    if (nodes[r].size() < 2) throw Error(ErrorKind::DimensionMismatch, "taylor_fit: node dimension");
    for (Eigen::Index c = 0; c < cols; ++c)
      a(r, c) = std::pow(nodes[r][0], powers[c].first) * std::pow(nodes[r][1], powers[c].second);
  }
  Vec scale = a.colwise().norm().transpose();
  for (Eigen::Index c = 0; c < cols; ++c) {
    if (scale[c] == 0.0) throw Error(ErrorKind::IllConditioned, "Taylor column vanishes on the grid");
    a.col(c) /= scale[c];
  }
  Eigen::JacobiSVD<Mat> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Vec sv = svd.singularValues();
  if (sv[cols - 1] == 0.0 || sv[0] / sv[cols - 1] > kTaylorCondMax)
    throw Error(ErrorKind::IllConditioned, "Vandermonde system is ill-conditioned");
  const Vec c = svd.solve(values);
  fit.residual = std::sqrt((a * c - values).squaredNorm() / rows);
  for (Eigen::Index k = 0; k < cols; ++k)
    fit.coeffs.push_back({powers[k].first, powers[k].second, c[k] / scale[k]});
  return fit;
}

TaylorFit taylor_fit(const SField& field, int degree) {
  std::vector<Vec> nodes;
  std::vector<double> vals;
  for (Eigen::Index i = 0; i < field.axis1.size(); ++i)
    for (Eigen::Index j = 0; j < field.axis2.size(); ++j) {
      nodes.push_back(Eigen::Vector2d(field.axis1[i], field.axis2[j]));
      vals.push_back(field.values(i, j));
    }
  return taylor_fit(nodes, Eigen::Map<const Vec>(vals.data(), static_cast<Eigen::Index>(vals.size())), degree);
}

double action_integral(const HamiltonianSystem& sys, const PeriodBasis& basis, const std::optional<Vec>& tau_reference,
                       int generator, Tolerances tol, double tol_flow) {
  sys.validate();
  const int n = sys.n;
  Vec tau = basis.tau();
  if (tau_reference) {
    if (tau_reference->size() != n) throw Error(ErrorKind::DimensionMismatch, "tau reference size");
    for (int j = 0; j < n; ++j)
      if (j != generator) tau[j] = lift_near(tau[j], (*tau_reference)[j]);
  }
  Vec y(2 * n + 1);
  y << basis.anchor, 0.0;
  IntegratorOptions io;
  io.tol = tol;
  std::vector<int> order{generator};
  for (int j = 0; j < n; ++j)
    if (j != generator) order.push_back(j);
  for (int j : order) {
    if (tau[j] == 0.0) continue;
    const ScalarField& f = sys.components[j];
    auto rhs = [&f, n](const Vec& s) {
      const PhaseVector p = s.head(2 * n);
      const Vec x = ham_vector_field(f, p);
      Vec out(2 * n + 1);
      out << x, -p.tail(n).dot(x.head(n));
      return out;
    };
    Dopri5 ode(rhs, y, tau[j], io);
    ode.advance_to(tau[j]);
    y = ode.y();
  }
  const double gap = phase_distance(sys, y.head(2 * n), basis.anchor);
  if (gap > tol_flow) throw Error(ErrorKind::ClosureFailed, "action loop fails to close: gap " + std::to_string(gap));
  return y[2 * n];
}

}  // namespace semitoric
