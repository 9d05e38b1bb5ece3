#include "dysarthria/error.hpp"

namespace dysarthria {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::MalformedRecord: return "MalformedRecord";
    case ErrorCode::UnknownSeverity: return "UnknownSeverity";
    case ErrorCode::UnknownPhoneme: return "UnknownPhoneme";
    case ErrorCode::UnsupportedFormat: return "UnsupportedFormat";
    case ErrorCode::TruncatedFile: return "TruncatedFile";
    case ErrorCode::OverlappingIntervals: return "OverlappingIntervals";
    case ErrorCode::UnorderedIntervals: return "UnorderedIntervals";
    case ErrorCode::UnknownLabel: return "UnknownLabel";
    case ErrorCode::InvalidProfile: return "InvalidProfile";
    case ErrorCode::IoError: return "IoError";
    case ErrorCode::ClipTooShort: return "ClipTooShort";
    case ErrorCode::NoFormantsFound: return "NoFormantsFound";
    case ErrorCode::TooFewPeriods: return "TooFewPeriods";
    case ErrorCode::NoVoicedFrames: return "NoVoicedFrames";
    case ErrorCode::EmptyCanonical: return "EmptyCanonical";
    case ErrorCode::UnclassifiedSymbol: return "UnclassifiedSymbol";
    case ErrorCode::MissingCornerNoMean: return "MissingCornerNoMean";
    case ErrorCode::MissingAE: return "MissingAE";
    case ErrorCode::ZeroDuration: return "ZeroDuration";
    case ErrorCode::NoQualifyingFrames: return "NoQualifyingFrames";
    case ErrorCode::TooFewIntervals: return "TooFewIntervals";
    case ErrorCode::EmptyGroup: return "EmptyGroup";
    case ErrorCode::ZeroVariance: return "ZeroVariance";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::TooFewRows: return "TooFewRows";
    case ErrorCode::SingleClass: return "SingleClass";
    case ErrorCode::NoConvergence: return "NoConvergence";
    case ErrorCode::SingleSpeaker: return "SingleSpeaker";
    case ErrorCode::ZeroBaseline: return "ZeroBaseline";
    case ErrorCode::InvalidSpec: return "InvalidSpec";
    case ErrorCode::MissingSeverity: return "MissingSeverity";
  }
  return "Unknown";
}

}  // namespace dysarthria
