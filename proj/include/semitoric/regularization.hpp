#pragma once

#include "semitoric/lattice.hpp"

#include <functional>
#include <optional>
#include <vector>

namespace semitoric {

struct SigmaSample {
  RegularValue at;
  /// sigma_1 real; sigma_2..sigma_n reduced to [0, 2 pi) unless lifted.
  Vec sigma;
};

/// sigma_1 = tau_1 + Re ln w, sigma_2 = tau_2 - Im ln w, sigma_j = tau_j (j >= 3).
SigmaSample sigma_from_periods(const PeriodBasis& basis, const LogBranch& branch = {});

/// The representative of value + 2 pi k closest to reference.
double lift_near(double value, double reference);

/// Samples on a rectangular grid in (v1, v2) at fixed (v3..vn).
struct SigmaGrid {
  Vec axis1, axis2;
  Vec rest;
  /// Row-major: sample (i, j) sits at (axis1[i], axis2[j]).
  std::vector<SigmaSample> samples;

  int size1() const { return static_cast<int>(axis1.size()); }
  int size2() const { return static_cast<int>(axis2.size()); }
  const SigmaSample& at(int i, int j) const { return samples[i * axis2.size() + j]; }
  SigmaSample& at(int i, int j) { return samples[i * axis2.size() + j]; }
};

/// Uniform axis "a:b:n".
Vec linspace(double a, double b, int count);

struct SigmaGridOptions {
  GridOptions grid;
  LogBranch branch;
};

/// Period bases and sigma at every node, then lifted by continuity.
SigmaGrid sigma_grid(const HamiltonianSystem& sys, const Vec& axis1, const Vec& axis2, const Vec& rest,
                     const PhaseVector& anchor_seed, const SigmaGridOptions& opts = {});

/// Lifts the angular entries of sigma to R by continuity: along axis1 at j = 0,
/// then along axis2 from each of those.
void lift_grid(SigmaGrid& grid);

/// |D1 sigma_2 - D2 sigma_1| at interior nodes (central differences); zero on the border.
Mat closedness_field(const SigmaGrid& grid);
double closedness_defect(const SigmaGrid& grid);

inline constexpr double kTolPath = 1e-3;

/// sigma at an arbitrary value, used along the initial ray from v = 0.
using SigmaSampler = std::function<SigmaSample(const Vec& v)>;

struct SField {
  /// S at grid nodes, same layout as the grid (size1 x size2).
  Mat values;
  Vec axis1, axis2;
  /// sigma(0) from Richardson extrapolation along the initial ray.
  Vec sigma_origin;
  double path_residual = 0.0;
};

struct IntegrateOptions {
  /// Trapezoid panels on the ray from 0 to the base node.
  int ray_panels = 16;
  double tol_path = kTolPath;
  LogBranch branch;
};

/// S with S(0) = 0: a ray from 0 to the base node (0, base_j), then two
/// grid-line paths (axis1 first or axis2 first) to every node.
SField integrate_S(const SigmaGrid& grid, const SigmaSampler& sampler, int base_j,
                   const IntegrateOptions& opts = {});

struct TaylorCoefficient {
  int j1 = 0, j2 = 0;
  double value = 0.0;
};

struct TaylorFit {
  int degree = 0;
  std::vector<TaylorCoefficient> coeffs;
  double residual = 0.0;
};

inline constexpr double kTaylorCondMax = 1e12;

/// Least-squares polynomial in (v1, v2) of total degree <= N with no constant term.
TaylorFit taylor_fit(const std::vector<Vec>& nodes, const Vec& values, int degree);
TaylorFit taylor_fit(const SField& field, int degree);

/// -sum_i xi_i dx_i integrated along the flow word realizing tau from the
/// anchor: generator flow for tau_g, then the periodic flows in index order.
/// With tau_reference, angular times are replaced by their lift nearest it.
double action_integral(const HamiltonianSystem& sys, const PeriodBasis& basis,
                       const std::optional<Vec>& tau_reference = std::nullopt, int generator = 0,
                       Tolerances tol = {}, double tol_flow = kTolFlow);

}  // namespace semitoric
