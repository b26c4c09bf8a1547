#include "thyrofna/error.hpp"

namespace thyrofna {

std::string_view error_code_name(ErrorCode code) {
  switch (code) {
  case ErrorCode::MalformedManifest: return "MalformedManifest";
  case ErrorCode::DuplicateId: return "DuplicateId";
  case ErrorCode::MissingFile: return "MissingFile";
  case ErrorCode::UnlabeledRecord: return "UnlabeledRecord";
  case ErrorCode::EmptyImage: return "EmptyImage";
  case ErrorCode::InvalidCanonicalSize: return "InvalidCanonicalSize";
  case ErrorCode::MalformedProposalFile: return "MalformedProposalFile";
  case ErrorCode::OutOfBoundsBox: return "OutOfBoundsBox";
  case ErrorCode::SplitViolation: return "SplitViolation";
  case ErrorCode::MixedSplit: return "MixedSplit";
  case ErrorCode::EmptyClass: return "EmptyClass";
  case ErrorCode::ShapeMismatch: return "ShapeMismatch";
  case ErrorCode::EmptySplit: return "EmptySplit";
  case ErrorCode::UnknownBackbone: return "UnknownBackbone";
  case ErrorCode::DivergedLoss: return "DivergedLoss";
  case ErrorCode::DimensionMismatch: return "DimensionMismatch";
  case ErrorCode::UnloadedParameters: return "UnloadedParameters";
  case ErrorCode::MissingBaseCheckpoint: return "MissingBaseCheckpoint";
  case ErrorCode::LengthMismatch: return "LengthMismatch";
  case ErrorCode::EmptyInput: return "EmptyInput";
  case ErrorCode::SingleClassInput: return "SingleClassInput";
  case ErrorCode::IoFailure: return "IoFailure";
  case ErrorCode::UntrainedBackbone: return "UntrainedBackbone";
  case ErrorCode::ConfigError: return "ConfigError";
  case ErrorCode::CheckpointMismatch: return "CheckpointMismatch";
  case ErrorCode::InvalidArgument: return "InvalidArgument";
  }
  return "Unknown";
}

bool is_validation_error(ErrorCode code) {
  switch (code) {
  case ErrorCode::MalformedManifest:
  case ErrorCode::DuplicateId:
  case ErrorCode::UnlabeledRecord:
  case ErrorCode::MalformedProposalFile:
  case ErrorCode::OutOfBoundsBox:
  case ErrorCode::ConfigError:
  case ErrorCode::CheckpointMismatch:
  case ErrorCode::InvalidArgument:
    return true;
  default:
    return false;
  }
}

Error::Error(ErrorCode code, const std::string &message)
    : std::runtime_error(std::string(error_code_name(code)) + ": " + message), code_(code) {}

void fail(ErrorCode code, const std::string &message) { throw Error(code, message); }

} // namespace thyrofna
