#pragma once

#include <stdexcept>
#include <string>

namespace atm {

// Values mirror atm_status in atm.h; keep both in sync.
enum class ErrorCode {
  InvalidArgument = 1,
  Io,
  MalformedWav,
  UnsupportedEncoding,
  SignalTooShort,
  ClipTooShort,
  DegenerateBand,
  InsufficientData,
  DimensionMismatch,
  EmptyDocument,
  MissingLabel,
  EmptyCorpus,
  UnknownWord,
  ZeroProbabilityWord,
  UnusedWord,
  MissingWordProfile,
  MissingTopicProfile,
  WindowTooLarge,
  GenreTooSmall,
  SingleClass,
  EmptyTestSet,
  UnknownGenre,
  TimelineTooShort,
  EmptyDataset,
  DuplicateSongId,
  MissingArtifact,
  Schema,
  Internal,
};

const char* error_code_name(ErrorCode code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) {
  throw Error(code, std::string(error_code_name(code)) + ": " + what);
}

}  // namespace atm
