#pragma once

#include "semitoric/geometry.hpp"

#include <cstdint>
#include <string>

namespace semitoric {

struct WilliamsonIndex {
  int k_e = 0, k_f = 0, k_h = 0, k_x = 0;

  int degrees_of_freedom() const { return k_e + 2 * k_f + k_h + k_x; }
  bool operator==(const WilliamsonIndex&) const = default;
  std::string to_string() const;
};

struct CriticalPoint {
  PhaseVector point;
  int rank = 0;
  WilliamsonIndex wtype;
  double residual = 0.0;
  bool degenerate = false;
};

inline constexpr double kTolRank = 1e-9;
inline constexpr double kTolCrit = 1e-10;
inline constexpr double kTolEig = 1e-7;

int rank_dF(const HamiltonianSystem& sys, const PhaseVector& p);

struct CriticalSearchOptions {
  int max_iter = 500;
  double tol_crit = kTolCrit;
  /// The search fails once it wanders farther than this from the seed.
  double search_radius = 0.5;
  /// Accept points whose rank falls below the target as well.
  bool allow_lower_rank = false;
};

/// BFGS descent on the sum of squared singular values of dF below the target rank.
CriticalPoint find_critical_point(const HamiltonianSystem& sys, const PhaseVector& seed, int target_rank,
                                  const CriticalSearchOptions& opts = {});

struct ClassifyOptions {
  int trials = 5;
  std::uint64_t seed = 0x5eed;
  double tol_eig = kTolEig;
};

/// Williamson type from the spectrum of K * sum c_i Hess f_i, with c drawn from
/// the annihilator of dF(p). Fills cp.wtype and cp.degenerate; throws
/// ErrorKind::Degenerate when no trial yields a consistent index.
WilliamsonIndex williamson_classify(const HamiltonianSystem& sys, CriticalPoint& cp,
                                    const ClassifyOptions& opts = {});

/// Convenience: classify at a point assumed critical.
WilliamsonIndex classify_at(const HamiltonianSystem& sys, const PhaseVector& p,
                            const ClassifyOptions& opts = {});

}  // namespace semitoric
