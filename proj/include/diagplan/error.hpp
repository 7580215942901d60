#pragma once

#include <stdexcept>
#include <string>

namespace diagplan {

enum class ErrorCode {
  ZeroOrNegativeProbability,
  ProbabilitySumOutOfTolerance,
  MatrixValueOutOfAlphabet,
  DimensionMismatch,
  DuplicateName,
  SymptomAlreadyApplied,
  IndexOutOfRange,
  EmptyInput,
  NonpositiveWeight,
  NegativeProbability,
  InvalidBlock,
  NotARefinement,
  TreeModelMismatch,
  ContradictoryObservation,
  ValueOutOfAlphabet,
  InvalidSpec,
  InstanceTooLarge,
  ParseError,
  IoError,
};

inline const char* to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::ZeroOrNegativeProbability: return "ZeroOrNegativeProbability";
    case ErrorCode::ProbabilitySumOutOfTolerance: return "ProbabilitySumOutOfTolerance";
    case ErrorCode::MatrixValueOutOfAlphabet: return "MatrixValueOutOfAlphabet";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::DuplicateName: return "DuplicateName";
    case ErrorCode::SymptomAlreadyApplied: return "SymptomAlreadyApplied";
    case ErrorCode::IndexOutOfRange: return "IndexOutOfRange";
    case ErrorCode::EmptyInput: return "EmptyInput";
    case ErrorCode::NonpositiveWeight: return "NonpositiveWeight";
    case ErrorCode::NegativeProbability: return "NegativeProbability";
    case ErrorCode::InvalidBlock: return "InvalidBlock";
    case ErrorCode::NotARefinement: return "NotARefinement";
    case ErrorCode::TreeModelMismatch: return "TreeModelMismatch";
    case ErrorCode::ContradictoryObservation: return "ContradictoryObservation";
    case ErrorCode::ValueOutOfAlphabet: return "ValueOutOfAlphabet";
    case ErrorCode::InvalidSpec: return "InvalidSpec";
    case ErrorCode::InstanceTooLarge: return "InstanceTooLarge";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::IoError: return "IoError";
  }
  return "UnknownError";
}

// All domain failures funnel through this one type so callers can branch on
// code() without string matching.
class DiagError : public std::runtime_error {
public:
  DiagError(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message),
        code_(code) {}

  ErrorCode code() const noexcept { return code_; }

private:
  ErrorCode code_;
};

}  // namespace diagplan
