#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace graphsamp {

enum class ErrorCode {
  // validation
  BadSize,
  BadBudget,
  BadProbability,
  IndexOutOfRange,
  ShapeMismatch,
  NegativeWeight,
  NonzeroDiagonal,
  NonPositiveImportance,
  NotSymmetric,
  EmptyBatch,
  AlreadySelected,
  DegenerateRange,
  BadConfig,
  ParseError,
  // numerical
  NotPSD,
  NotPD,
  SingularShiftedL,
  SingularOperator,
  SolveFailure,
  NoProgress,
  MissingImportance,
  IsolatedVertex,
};

constexpr std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::BadSize: return "BadSize";
    case ErrorCode::BadBudget: return "BadBudget";
    case ErrorCode::BadProbability: return "BadProbability";
    case ErrorCode::IndexOutOfRange: return "IndexOutOfRange";
    case ErrorCode::ShapeMismatch: return "ShapeMismatch";
    case ErrorCode::NegativeWeight: return "NegativeWeight";
    case ErrorCode::NonzeroDiagonal: return "NonzeroDiagonal";
    case ErrorCode::NonPositiveImportance: return "NonPositiveImportance";
    case ErrorCode::NotSymmetric: return "NotSymmetric";
    case ErrorCode::EmptyBatch: return "EmptyBatch";
    case ErrorCode::AlreadySelected: return "AlreadySelected";
    case ErrorCode::DegenerateRange: return "DegenerateRange";
    case ErrorCode::BadConfig: return "BadConfig";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::NotPSD: return "NotPSD";
    case ErrorCode::NotPD: return "NotPD";
    case ErrorCode::SingularShiftedL: return "SingularShiftedL";
    case ErrorCode::SingularOperator: return "SingularOperator";
    case ErrorCode::SolveFailure: return "SolveFailure";
    case ErrorCode::NoProgress: return "NoProgress";
    case ErrorCode::MissingImportance: return "MissingImportance";
    case ErrorCode::IsolatedVertex: return "IsolatedVertex";
  }
  return "Unknown";
}

/// True for errors raised by a numerical routine rather than by bad input.
constexpr bool is_numerical(ErrorCode code) {
  return code >= ErrorCode::NotPSD;
}

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) {
  throw Error(code, what);
}

}  // namespace graphsamp
