#include "semitoric/errors.hpp"

namespace semitoric {

const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::DimensionMismatch: return "dimension_mismatch";
    case ErrorKind::NonFinite: return "non_finite";
    case ErrorKind::StepUnderflow: return "step_underflow";
    case ErrorKind::HorizonExceeded: return "horizon_exceeded";
    case ErrorKind::NoConvergence: return "no_convergence";
    case ErrorKind::WrongRank: return "wrong_rank";
    case ErrorKind::Degenerate: return "degenerate";
    case ErrorKind::NotRegular: return "not_regular";
    case ErrorKind::BranchCut: return "branch_cut";
    case ErrorKind::ClosureFailed: return "closure_failed";
    case ErrorKind::MatchingAmbiguous: return "matching_ambiguous";
    case ErrorKind::NotUnimodular: return "not_unimodular";
    case ErrorKind::IllConditioned: return "ill_conditioned";
    case ErrorKind::PathDisagreement: return "path_disagreement";
    case ErrorKind::Winding: return "winding";
    case ErrorKind::InvalidArgument: return "invalid_argument";
    case ErrorKind::Config: return "config";
  }
  return "unknown";
}

}  // namespace semitoric
