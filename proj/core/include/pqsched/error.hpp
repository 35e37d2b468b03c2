#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace pqsched {

enum class ErrorCode {
  InvalidArgument,
  DimensionMismatch,
  EntryOutOfRange,
  RowNotStochastic,
  PrevalenceNotNormalized,
  NonPositiveRate,
  InvalidCost,
  ZeroColumn,
  EventOverflow,
  OracleUnavailable,
  BracketFailure,
  NonQuadratic,
  NonFiniteMoment,
  ScheduleNonPositive,
  EmptyPass,
  EmptyGrid,
  EmptyClass,
  ParseError,
  IoError,
};

std::string_view to_string(ErrorCode code) noexcept;

/// Exception carrying a machine-checkable code next to the human message.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace pqsched
