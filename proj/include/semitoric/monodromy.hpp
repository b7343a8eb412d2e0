#pragma once

#include "semitoric/lattice.hpp"

#include <vector>

namespace semitoric {

struct LoopSpec {
  /// Centre in the (v1, v2) plane.
  Eigen::Vector2d center = Eigen::Vector2d::Zero();
  double radius = 0.05;
  /// Fixed values v3..vn.
  Vec fixed;
  /// Samples per turn.
  int steps = 64;
  /// +1 counterclockwise, -1 clockwise.
  int orientation = 1;
  int turns = 1;

  std::vector<RegularValue> values(int n) const;
};

struct TransportResult {
  std::vector<RegularValue> values;
  /// Bases as computed at each value (tau_j reduced to [0, 2 pi)).
  std::vector<PeriodBasis> raw;
  /// Row 0 shifted by lattice multiples so that it varies continuously.
  std::vector<Mat> transported;
  /// Smallest runner-up/best jump ratio met along the loop.
  double worst_match_ratio = 0.0;
};

struct MonodromyMatrix {
  Eigen::MatrixXi entries;
  double max_rounding_error = 0.0;
};

inline constexpr double kMatchRatio = 2.0;
inline constexpr double kTolRound = 1e-3;

TransportResult transport_basis(const HamiltonianSystem& sys, const LoopSpec& loop, const PhaseVector& anchor_seed,
                                const BasisOptions& opts = {});

/// Integer matrix M with last = M first.
MonodromyMatrix monodromy_matrix(const Mat& first, const Mat& last);
MonodromyMatrix monodromy_matrix(const PeriodBasis& first, const PeriodBasis& last);

MonodromyMatrix loop_monodromy(const HamiltonianSystem& sys, const LoopSpec& loop, const PhaseVector& anchor_seed,
                               const BasisOptions& opts = {});

}  // namespace semitoric
