#pragma once

// Symplectic calculus on standard R^{2n} with Darboux coordinates ordered
// (x_1..x_n, xi_1..xi_n) and symplectic form omega = sum d xi_i ^ d x_i.
//
// Hamiltonian vector fields satisfy omega(X_f, .) = df, i.e.
//   dx/dt = -df/dxi,   dxi/dt = df/dx.
// With this orientation the focus-focus block (f1, f2) flows as
//   z1 -> e^{-t} z1,  z2 -> e^{t} z2   under f1,
// with z1 = x1 + i x2, z2 = xi1 + i xi2.

#include <Eigen/Dense>

#include <functional>
#include <optional>
#include <random>
#include <string>
#include <vector>

namespace semitoric {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

/// Point of R^{2n}: (x_1..x_n, xi_1..xi_n).
using PhaseVector = Eigen::VectorXd;

/// A smooth function on R^{2n}. Derivatives are optional; central
/// differences are used when they are absent. `exact_flow`, when present,
/// is the closed-form time-t map of the Hamiltonian vector field.
struct ScalarField {
  std::function<double(const PhaseVector&)> evaluate;
  std::function<Vec(const PhaseVector&)> gradient;
  std::function<Mat(const PhaseVector&)> hessian;
  std::function<PhaseVector(const PhaseVector&, double)> exact_flow;
};

struct HamiltonianSystem {
  int n = 0;
  std::vector<ScalarField> components;
  /// periodic[i]: component i generates a 2*pi-periodic flow.
  std::vector<bool> periodic;
  /// Position indices (0-based, < n) whose coordinate x_j is an angle mod 2*pi.
  std::vector<int> angle_coords;
  std::string name;

  int dim() const { return 2 * n; }
  void validate() const;
};

namespace tol {
inline constexpr double grad = 1e-6;
inline constexpr double sym = 1e-9;
inline constexpr double bracket = 1e-8;
}  // namespace tol

void require_dim(const PhaseVector& p, int dim, const char* where);
void require_finite(const Vec& v, const char* where);

double fd_step(double coordinate);

Vec gradient_of(const ScalarField& f, const PhaseVector& p);
Vec fd_gradient(const ScalarField& f, const PhaseVector& p);
Mat fd_hessian(const ScalarField& f, const PhaseVector& p);

/// Symmetric Hessian at p; analytic when available, else second differences.
Mat hessian_at(const ScalarField& f, const PhaseVector& p);

/// sum_i (df/dx_i dg/dxi_i - df/dxi_i dg/dx_i); {x_1, xi_1} = 1.
double poisson_bracket(const ScalarField& f, const ScalarField& g, const PhaseVector& p);

Vec ham_vector_field(const ScalarField& f, const PhaseVector& p);
/// X = K grad f with K = [[0, -I], [I, 0]].
Mat hamiltonian_operator(int n);
/// Standard symplectic Gram matrix J with S^T J S = J for symplectic S.
Mat symplectic_gram(int n);

Vec moment_map(const HamiltonianSystem& sys, const PhaseVector& p);
/// n x 2n matrix of component gradients.
Mat moment_jacobian(const HamiltonianSystem& sys, const PhaseVector& p);
/// Vector field of sum_i c_i f_i.
Vec joint_vector_field(const HamiltonianSystem& sys, const Vec& coeffs, const PhaseVector& p);

/// a - b with angle coordinates wrapped into (-pi, pi].
Vec phase_difference(const HamiltonianSystem& sys, const PhaseVector& a, const PhaseVector& b);
double phase_distance(const HamiltonianSystem& sys, const PhaseVector& a, const PhaseVector& b);
double wrap_angle(double a);

/// Largest |{f_i, f_j}| over the given points.
double max_bracket_defect(const HamiltonianSystem& sys, const std::vector<PhaseVector>& points);

std::vector<PhaseVector> random_points(int dim, int count, double radius, std::mt19937_64& rng);

}  // namespace semitoric
