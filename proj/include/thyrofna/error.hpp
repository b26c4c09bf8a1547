#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace thyrofna {

enum class ErrorCode {
  MalformedManifest,
  DuplicateId,
  MissingFile,
  UnlabeledRecord,
  EmptyImage,
  InvalidCanonicalSize,
  MalformedProposalFile,
  OutOfBoundsBox,
  SplitViolation,
  MixedSplit,
  EmptyClass,
  ShapeMismatch,
  EmptySplit,
  UnknownBackbone,
  DivergedLoss,
  DimensionMismatch,
  UnloadedParameters,
  MissingBaseCheckpoint,
  LengthMismatch,
  EmptyInput,
  SingleClassInput,
  IoFailure,
  UntrainedBackbone,
  ConfigError,
  CheckpointMismatch,
  InvalidArgument,
};

std::string_view error_code_name(ErrorCode code);

// True for errors caused by bad user input (config, manifests, proposal
// files), which the CLI reports with exit code 1.
bool is_validation_error(ErrorCode code);

class Error : public std::runtime_error {
public:
  Error(ErrorCode code, const std::string &message);

  ErrorCode code() const noexcept { return code_; }

private:
  ErrorCode code_;
};

[[noreturn]] void fail(ErrorCode code, const std::string &message);

} // namespace thyrofna
