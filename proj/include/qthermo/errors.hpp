#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace qthermo {

enum class ErrorKind {
  InvalidDimension,
  ShapeError,
  InvalidArgument,
  NotHermitian,
  NotAnEigenoperator,
  NonUniqueStationary,
  NotAState,
  NumericalDrift,
  StepTooLarge,
  SingularWeight,
  NotStationary,
  IncompleteAssignment,
  SingularLogarithm,
  SupportError,
  GridTooCoarse,
  IdentityViolation,
  ResolventSingular,
  NotEquilibrium,
  DetailedBalanceViolation,
  NotAmplifying,
  TruncationOverflow,
  ZeroOccupation,
};

constexpr std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidDimension: return "InvalidDimension";
    case ErrorKind::ShapeError: return "ShapeError";
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::NotHermitian: return "NotHermitian";
    case ErrorKind::NotAnEigenoperator: return "NotAnEigenoperator";
    case ErrorKind::NonUniqueStationary: return "NonUniqueStationary";
    case ErrorKind::NotAState: return "NotAState";
    case ErrorKind::NumericalDrift: return "NumericalDrift";
    case ErrorKind::StepTooLarge: return "StepTooLarge";
    case ErrorKind::SingularWeight: return "SingularWeight";
    case ErrorKind::NotStationary: return "NotStationary";
    case ErrorKind::IncompleteAssignment: return "IncompleteAssignment";
    case ErrorKind::SingularLogarithm: return "SingularLogarithm";
    case ErrorKind::SupportError: return "SupportError";
    case ErrorKind::GridTooCoarse: return "GridTooCoarse";
    case ErrorKind::IdentityViolation: return "IdentityViolation";
    case ErrorKind::ResolventSingular: return "ResolventSingular";
    case ErrorKind::NotEquilibrium: return "NotEquilibrium";
    case ErrorKind::DetailedBalanceViolation: return "DetailedBalanceViolation";
    case ErrorKind::NotAmplifying: return "NotAmplifying";
    case ErrorKind::TruncationOverflow: return "TruncationOverflow";
    case ErrorKind::ZeroOccupation: return "ZeroOccupation";
  }
  return "Unknown";
}

/// Every failure raised by the library carries one of the kinds above.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) { throw Error(kind, what); }

inline void require(bool condition, ErrorKind kind, const std::string& what) {
  if (!condition) fail(kind, what);
}

}  // namespace qthermo
