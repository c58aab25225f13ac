#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace harvest {

enum class ErrorCode {
  kInvalidArgument,
  kMissingVariable,
  kUnexpectedVariable,
  kProviderUnavailable,
  kTransientFailure,
  kResponseTooLong,
  kUnparseableVerdict,
  kEmptyResult,
  kBackendUnavailable,
  kPageNotFound,
  kLexiconEmpty,
  kFileUnreadable,
  kCorruptCompression,
  kMalformedRecord,
  kSkipRatioExceeded,
  kOverlappingLists,
  kMissingSalt,
  kCrossThreadComment,
  kAdapterUnavailable,
  kSchemaError,
  kConfigInvalid,
  kIoError,
};

std::string_view to_string(ErrorCode code);

// Single exception type for the library; callers branch on code().
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, std::string detail);

  ErrorCode code() const noexcept { return code_; }
  const std::string& detail() const noexcept { return detail_; }

 private:
  ErrorCode code_;
  std::string detail_;
};

// An Error annotated with the pipeline stage it escaped from.
class StageError : public Error {
 public:
  StageError(std::string stage, const Error& cause);

  const std::string& stage() const noexcept { return stage_; }

 private:
  std::string stage_;
};

}  // namespace harvest
