#include "semitoric/monodromy.hpp"

#include <cmath>
#include <limits>
#include <numbers>

namespace semitoric {

namespace {
constexpr double kTwoPi = 2.0 * std::numbers::pi;
}

std::vector<RegularValue> LoopSpec::values(int n) const {
  if (n < 2) throw Error(ErrorKind::InvalidArgument, "loops need n >= 2");
  if (fixed.size() != n - 2) throw Error(ErrorKind::DimensionMismatch, "loop: fixed values");
  if (steps < 8) throw Error(ErrorKind::InvalidArgument, "loop needs at least 8 steps");
  if (turns < 1) throw Error(ErrorKind::InvalidArgument, "loop needs at least one turn");
  if (orientation != 1 && orientation != -1) throw Error(ErrorKind::InvalidArgument, "orientation must be +1 or -1");
  if (!(radius > 0.0)) throw Error(ErrorKind::InvalidArgument, "loop radius must be positive");
  std::vector<RegularValue> out;
  const int total = steps * turns;
  for (int k = 0; k <= total; ++k) {
    // the closing sample repeats the start exactly
    const double a = (k == total ? 0.0 : kTwoPi * k / steps) * orientation;
    Vec v(n);
    v << center.x() + radius * std::cos(a), center.y() + radius * std::sin(a), fixed;
    out.emplace_back(v);
  }
  return out;
}

TransportResult transport_basis(const HamiltonianSystem& sys, const LoopSpec& loop, const PhaseVector& anchor_seed,
                                const BasisOptions& opts) {
  TransportResult out;
  out.values = loop.values(sys.n);
  GridOptions go;
  go.basis = opts;
  go.policy = AnchorPolicy::Continuation;
  const auto entries = period_grid(sys, out.values, anchor_seed, go);
  out.worst_match_ratio = std::numeric_limits<double>::infinity();
  const int g = opts.generator;
  for (std::size_t k = 0; k < entries.size(); ++k) {
    const auto& e = entries[k];
    if (!e.basis)
      throw Error(*e.error, "loop sample " + std::to_string(k) + ": " + e.message);
    out.raw.push_back(*e.basis);
    Mat rows = e.basis->rows;
    if (k > 0) {
      const Vec prev = out.transported.back().row(0).transpose();
      Vec cur = rows.row(0).transpose();
      for (int j = 0; j < sys.n; ++j)
        if (j != g) cur[j] += kTwoPi * std::round((prev[j] - cur[j]) / kTwoPi);
      const double best = (cur - prev).norm();
      double runner = std::numeric_limits<double>::infinity();
      for (int j = 0; j < sys.n; ++j) {
        if (j == g) continue;
        for (int s : {-1, 1}) {
          Vec alt = cur;
          alt[j] += s * kTwoPi;
          runner = std::min(runner, (alt - prev).norm());
        }
      }
      if (runner < kMatchRatio * best)
        throw Error(ErrorKind::MatchingAmbiguous,
                    "loop sample " + std::to_string(k) + ": lattice shift is ambiguous (refine the loop)");
      if (best > 0.0) out.worst_match_ratio = std::min(out.worst_match_ratio, runner / best);
      rows.row(0) = cur.transpose();
    }
    out.transported.push_back(rows);
  }
  return out;
}

MonodromyMatrix monodromy_matrix(const Mat& first, const Mat& last) {
  if (first.rows() != first.cols() || first.rows() != last.rows() || last.rows() != last.cols())
    throw Error(ErrorKind::DimensionMismatch, "monodromy: basis shapes");
  const Mat m = last * first.inverse();
  if (!m.allFinite()) throw Error(ErrorKind::NonFinite, "monodromy: singular basis");
  MonodromyMatrix out;
  out.entries = m.array().round().cast<int>().matrix();
  out.max_rounding_error = (m - out.entries.cast<double>()).cwiseAbs().maxCoeff();
  if (out.max_rounding_error > kTolRound)
    throw Error(ErrorKind::NotUnimodular,
                "monodromy matrix is not integral (rounding error " + std::to_string(out.max_rounding_error) + ")");
  const long det = std::lround(out.entries.cast<double>().determinant());
  if (det != 1 && det != -1) throw Error(ErrorKind::NotUnimodular, "monodromy matrix has determinant " + std::to_string(det));
  return out;
}

MonodromyMatrix monodromy_matrix(const PeriodBasis& first, const PeriodBasis& last) {
  return monodromy_matrix(first.rows, last.rows);
}

MonodromyMatrix loop_monodromy(const HamiltonianSystem& sys, const LoopSpec& loop, const PhaseVector& anchor_seed,
                               const BasisOptions& opts) {
  const TransportResult t = transport_basis(sys, loop, anchor_seed, opts);
  return monodromy_matrix(t.transported.front(), t.transported.back());
}

}  // namespace semitoric
