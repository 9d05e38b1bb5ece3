#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace dysarthria {

enum class ErrorCode {
  // corpus-io
  MalformedRecord,
  UnknownSeverity,
  UnknownPhoneme,
  UnsupportedFormat,
  TruncatedFile,
  OverlappingIntervals,
  UnorderedIntervals,
  UnknownLabel,
  InvalidProfile,
  IoError,
  // signal-analysis
  ClipTooShort,
  NoFormantsFound,
  // voice-quality
  TooFewPeriods,
  NoVoicedFrames,
  // pronunciation
  EmptyCanonical,
  UnclassifiedSymbol,
  MissingCornerNoMean,
  MissingAE,
  // prosody
  ZeroDuration,
  NoQualifyingFrames,
  TooFewIntervals,
  // analysis-stats
  EmptyGroup,
  ZeroVariance,
  InvalidArgument,
  // ml-pipeline
  TooFewRows,
  SingleClass,
  NoConvergence,
  SingleSpeaker,
  ZeroBaseline,
  // fixtures / cli
  InvalidSpec,
  MissingSeverity,
};

std::string_view to_string(ErrorCode code) noexcept;

/// Every failure raised by the toolkit carries one of the codes above so
/// callers can branch on the kind without parsing messages.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

/// Error tied to a line of an input file (manifest, annotation).
class LineError : public Error {
 public:
  LineError(ErrorCode code, std::size_t line, const std::string& message)
      : Error(code, "line " + std::to_string(line) + ": " + message), line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

}  // namespace dysarthria
