#pragma once

#include "semitoric/geometry.hpp"

#include <array>
#include <random>
#include <string>
#include <vector>

namespace semitoric {

enum class BlockKind { Elliptic, Hyperbolic, FocusFocus, Transverse };

struct BlockSpec {
  BlockKind kind;
  int multiplicity = 1;
};

/// Degrees of freedom consumed by a block list: 2 per focus-focus block, 1 otherwise.
int degrees_of_freedom(const std::vector<BlockSpec>& blocks);

const char* to_string(BlockKind kind);
BlockKind block_kind_from_string(const std::string& s);

/// Smooth map g: R^n -> R^n used to change the moment map to g o F.
struct ReparamMap {
  std::function<Vec(const Vec&)> forward;
  std::function<Mat(const Vec&)> jacobian;
  /// Optional second derivatives: entry i is the Hessian of g_i.
  std::function<std::vector<Mat>(const Vec&)> second;
  /// passthrough[i] = j when g_i(v) == v_j identically, else -1.
  std::vector<int> passthrough;
};

inline constexpr double kReparamCondMax = 1e8;

ReparamMap linear_reparam(const Mat& a);
ReparamMap identity_reparam(int n);

/// f(p) = 1/2 p^T q p + b^T p, with closed-form flow.
ScalarField quadratic_field(const Mat& q, const Vec& b);

/// Direct-sum quadratic model; components ordered (f1, f2 per focus-focus
/// block, elliptic, hyperbolic, transverse), coordinates allocated in the
/// same order.
HamiltonianSystem q_model(const std::vector<BlockSpec>& blocks);

/// H = 1/2 |xi|^2 + r^4 - r^2, J = x1 xi2 - x2 xi1 on R^4.
HamiltonianSystem champagne_bottle();

/// Hyperbolic normal-form coordinate of the champagne bottle: the action of the
/// vanishing cycle, q1 = (1 / pi i) \oint sqrt(P(u)) / (2u) du with u = r^2 and
/// P(u) = 2Hu - J^2 + 2u^2 - 2u^3, on a circle around the two small roots.
/// Returns (q1, dq1/dH, dq1/dJ, d2/dH2, d2/dHdJ, d2/dJ2). Needs |H|, |J| small.
std::array<double, 6> vanishing_action(double h, double j);

/// Champagne bottle with H replaced by q1(H, J), so that (q1, J) is the
/// focus-focus normal form near the origin.
HamiltonianSystem normalized_champagne_bottle();

/// Appends k Darboux pairs (theta_j, I_j) with components I_j = xi_j. theta_j
/// is registered as an angle coordinate.
HamiltonianSystem product_with_free_torus(const HamiltonianSystem& sys, int k);

/// Components become g o F. Fibers are unchanged.
HamiltonianSystem reparametrize(const HamiltonianSystem& sys, const ReparamMap& g);

/// Pulls the system back through the linear symplectic map p = s q.
HamiltonianSystem symplectic_change(const HamiltonianSystem& sys, const Mat& s);

/// Random linear symplectic matrix of size 2n (product of shears and a
/// block-diagonal GL(n) factor), entries of moderate size.
Mat random_symplectic(int n, std::mt19937_64& rng);

}  // namespace semitoric
