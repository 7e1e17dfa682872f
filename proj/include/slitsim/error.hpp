#pragma once

#include <stdexcept>
#include <string>

namespace slitsim {

enum class ErrorCode {
  NotHermitian,
  TraceNotOne,
  NotPositive,
  DimensionMismatch,
  NotNormalized,
  WrongDimension,
  OutOfRange,
  ImagePlaneSingular,
  DarkPoint,
  NegativeDensity,
  NotOrthogonal,
  NotComplete,
  ImpossibleOutcome,
  SearchFailed,
  ClickProbabilityOverflow,
  NoCounts,
  PlanMismatch,
  AllZero,
  ParseError,
  ValidationError,
};

inline const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::NotHermitian: return "NotHermitian";
    case ErrorCode::TraceNotOne: return "TraceNotOne";
    case ErrorCode::NotPositive: return "NotPositive";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::NotNormalized: return "NotNormalized";
    case ErrorCode::WrongDimension: return "WrongDimension";
    case ErrorCode::OutOfRange: return "OutOfRange";
    case ErrorCode::ImagePlaneSingular: return "ImagePlaneSingular";
    case ErrorCode::DarkPoint: return "DarkPoint";
    case ErrorCode::NegativeDensity: return "NegativeDensity";
    case ErrorCode::NotOrthogonal: return "NotOrthogonal";
    case ErrorCode::NotComplete: return "NotComplete";
    case ErrorCode::ImpossibleOutcome: return "ImpossibleOutcome";
    case ErrorCode::SearchFailed: return "SearchFailed";
    case ErrorCode::ClickProbabilityOverflow: return "ClickProbabilityOverflow";
    case ErrorCode::NoCounts: return "NoCounts";
    case ErrorCode::PlanMismatch: return "PlanMismatch";
    case ErrorCode::AllZero: return "AllZero";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::ValidationError: return "ValidationError";
  }
  return "UnknownError";
}

/// Exit status the CLI maps an error to: dead ends of the measurement
/// planning/execution itself get 2, validation and everything else 1.
inline int exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::SearchFailed:
    case ErrorCode::ImpossibleOutcome:
      return 2;
    default:
      return 1;
  }
}

/// Library-wide exception. `detail` carries the worst offending magnitude
/// for invariant violations (e.g. the most negative eigenvalue).
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message, double detail = 0.0)
      : std::runtime_error(std::string(to_string(code)) + ": " + message),
        code_(code),
        message_(message),
        detail_(detail) {}

  ErrorCode code() const { return code_; }
  const std::string& message() const { return message_; }
  double detail() const { return detail_; }

 private:
  ErrorCode code_;
  std::string message_;
  double detail_;
};

}  // namespace slitsim
