#include "babble/errors.hpp"

#include <string>

namespace babble {

std::string_view code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::CapacityExceeded: return "CapacityExceeded";
    case ErrorCode::EmptyVocabulary: return "EmptyVocabulary";
    case ErrorCode::UnknownPair: return "UnknownPair";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::NotOneHot: return "NotOneHot";
    case ErrorCode::UnlabeledCluster: return "UnlabeledCluster";
    case ErrorCode::UnexpectedInput: return "UnexpectedInput";
    case ErrorCode::SessionTerminated: return "SessionTerminated";
    case ErrorCode::ConfigInvalid: return "ConfigInvalid";
    case ErrorCode::DegenerateConfig: return "DegenerateConfig";
    case ErrorCode::IndexOutOfRange: return "IndexOutOfRange";
    case ErrorCode::EmptyInput: return "EmptyInput";
    case ErrorCode::IoFailure: return "IoFailure";
    case ErrorCode::CorruptLog: return "CorruptLog";
    case ErrorCode::Mismatch: return "Mismatch";
    case ErrorCode::WrongPhase: return "WrongPhase";
    case ErrorCode::UnknownSession: return "UnknownSession";
    case ErrorCode::NotTerminated: return "NotTerminated";
    case ErrorCode::DuplicateSurvey: return "DuplicateSurvey";
    case ErrorCode::RangeViolation: return "RangeViolation";
    case ErrorCode::InvalidConfig: return "InvalidConfig";
  }
  return "Unknown";
}

Error::Error(ErrorCode code, const std::string& message)
    : std::runtime_error(std::string(code_name(code)) + ": " + message), code_(code) {}

}  // namespace babble
