#pragma once

#include "semitoric/errors.hpp"
#include "semitoric/flow.hpp"

#include <complex>
#include <optional>
#include <string>
#include <vector>

namespace semitoric {

struct RegularValue {
  Vec v;
  /// v_1 + i v_2 (zero when n < 2).
  std::complex<double> w;

  RegularValue() = default;
  explicit RegularValue(Vec value);
};

struct PeriodBasis {
  RegularValue at;
  /// Row 0 is tau(v); row j >= 1 is 2*pi e_j.
  Mat rows;
  PhaseVector anchor;
  Vec residuals;
  /// Point where the generator trajectory from the anchor first meets the orbit.
  PhaseVector hit_point;

  Vec tau() const { return rows.row(0).transpose(); }
};

inline constexpr double kTolLeafNewton = 1e-10;
inline constexpr double kTolFlow = 1e-8;

/// Damped Gauss-Newton (minimum-norm steps) onto F^{-1}(v).
PhaseVector project_to_leaf(const HamiltonianSystem& sys, const Vec& v, const PhaseVector& seed,
                            double tol_leaf = kTolLeafNewton, int max_iter = 100);

struct BasisOptions {
  HitOptions hit;
  double tol_flow = kTolFlow;
  int generator = 0;
};

PeriodBasis build_period_basis(const HamiltonianSystem& sys, const RegularValue& v, const PhaseVector& anchor_seed,
                               const BasisOptions& opts = {});

/// Largest anchor displacement over the integer combinations m in {-range..range}^n
/// of the rows, each divided by (1 + sum |m_i|).
double lattice_defect(const HamiltonianSystem& sys, const PeriodBasis& basis, int range = 2, Tolerances tol = {});

/// Determination of the complex logarithm with arg in (cut - 2*pi, cut).
struct LogBranch {
  double cut_angle = 3.14159265358979323846;

  bool on_cut(std::complex<double> z, double tol = 1e-12) const;
  std::complex<double> log(std::complex<double> z) const;
};

/// ln(eps^2) - ln(conj w), with the logarithm taken as the conjugate of the
/// branch value at w, so the cut is a condition on w.
std::complex<double> inside_model_return(std::complex<double> w, double epsilon, const LogBranch& branch = {});

enum class AnchorPolicy { Seed, Continuation };

struct GridEntry {
  RegularValue at;
  std::optional<PeriodBasis> basis;
  std::optional<ErrorKind> error;
  std::string message;
};

struct GridOptions {
  BasisOptions basis;
  AnchorPolicy policy = AnchorPolicy::Seed;
  /// Worker threads for the Seed policy; continuation is always sequential.
  int threads = 1;
};

std::vector<GridEntry> period_grid(const HamiltonianSystem& sys, const std::vector<RegularValue>& values,
                                   const PhaseVector& anchor_seed, const GridOptions& opts = {});

}  // namespace semitoric
