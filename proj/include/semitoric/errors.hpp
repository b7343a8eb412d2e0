#pragma once

#include <stdexcept>
#include <string>

namespace semitoric {

enum class ErrorKind {
  DimensionMismatch,
  NonFinite,
  StepUnderflow,
  HorizonExceeded,
  NoConvergence,
  WrongRank,
  Degenerate,
  NotRegular,
  BranchCut,
  ClosureFailed,
  MatchingAmbiguous,
  NotUnimodular,
  IllConditioned,
  PathDisagreement,
  Winding,
  InvalidArgument,
  Config,
};

const char* to_string(ErrorKind kind);

/// Numerical or contract failure raised by the toolkit. The kind is
/// machine-readable; the CLI maps Config to exit code 1, everything else to 2.
class Error : public std::runtime_error {
public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

private:
  ErrorKind kind_;
};

}  // namespace semitoric
