#include "atm/error.hpp"

namespace atm {

const char* error_code_name(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::Io: return "Io";
    case ErrorCode::MalformedWav: return "MalformedWav";
    case ErrorCode::UnsupportedEncoding: return "UnsupportedEncoding";
    case ErrorCode::SignalTooShort: return "SignalTooShort";
    case ErrorCode::ClipTooShort: return "ClipTooShort";
    case ErrorCode::DegenerateBand: return "DegenerateBand";
    case ErrorCode::InsufficientData: return "InsufficientData";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::EmptyDocument: return "EmptyDocument";
    case ErrorCode::MissingLabel: return "MissingLabel";
    case ErrorCode::EmptyCorpus: return "EmptyCorpus";
    case ErrorCode::UnknownWord: return "UnknownWord";
    case ErrorCode::ZeroProbabilityWord: return "ZeroProbabilityWord";
    case ErrorCode::UnusedWord: return "UnusedWord";
    case ErrorCode::MissingWordProfile: return "MissingWordProfile";
    case ErrorCode::MissingTopicProfile: return "MissingTopicProfile";
    case ErrorCode::WindowTooLarge: return "WindowTooLarge";
    case ErrorCode::GenreTooSmall: return "GenreTooSmall";
    case ErrorCode::SingleClass: return "SingleClass";
    case ErrorCode::EmptyTestSet: return "EmptyTestSet";
    case ErrorCode::UnknownGenre: return "UnknownGenre";
    case ErrorCode::TimelineTooShort: return "TimelineTooShort";
    case ErrorCode::EmptyDataset: return "EmptyDataset";
    case ErrorCode::DuplicateSongId: return "DuplicateSongId";
    case ErrorCode::MissingArtifact: return "MissingArtifact";
    case ErrorCode::Schema: return "Schema";
    case ErrorCode::Internal: return "Internal";
  }
  return "Unknown";
}

}  // namespace atm
