#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace babble {

// Machine-readable failure categories. The names are part of the wire
// format of the session service and the CLI diagnostics.
enum class ErrorCode {
  CapacityExceeded,
  EmptyVocabulary,
  UnknownPair,
  DimensionMismatch,
  NotOneHot,
  UnlabeledCluster,
  UnexpectedInput,
  SessionTerminated,
  ConfigInvalid,
  DegenerateConfig,
  IndexOutOfRange,
  EmptyInput,
  IoFailure,
  CorruptLog,
  Mismatch,
  WrongPhase,
  UnknownSession,
  NotTerminated,
  DuplicateSurvey,
  RangeViolation,
  InvalidConfig,
};

std::string_view code_name(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message);

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace babble
