#include "harvest/errors.hpp"

namespace harvest {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument: return "invalid argument";
    case ErrorCode::kMissingVariable: return "missing variable";
    case ErrorCode::kUnexpectedVariable: return "unexpected variable";
    case ErrorCode::kProviderUnavailable: return "provider unavailable";
    case ErrorCode::kTransientFailure: return "transient failure";
    case ErrorCode::kResponseTooLong: return "response too long";
    case ErrorCode::kUnparseableVerdict: return "unparseable verdict";
    case ErrorCode::kEmptyResult: return "empty result";
    case ErrorCode::kBackendUnavailable: return "backend unavailable";
    case ErrorCode::kPageNotFound: return "page not found";
    case ErrorCode::kLexiconEmpty: return "lexicon empty";
    case ErrorCode::kFileUnreadable: return "file unreadable";
    case ErrorCode::kCorruptCompression: return "corrupt compression";
    case ErrorCode::kMalformedRecord: return "malformed record";
    case ErrorCode::kSkipRatioExceeded: return "skip ratio exceeded";
    case ErrorCode::kOverlappingLists: return "overlapping lists";
    case ErrorCode::kMissingSalt: return "missing salt";
    case ErrorCode::kCrossThreadComment: return "cross-thread comment";
    case ErrorCode::kAdapterUnavailable: return "adapter unavailable";
    case ErrorCode::kSchemaError: return "schema error";
    case ErrorCode::kConfigInvalid: return "invalid config";
    case ErrorCode::kIoError: return "i/o error";
  }
  return "unknown error";
}

namespace {
std::string compose(ErrorCode code, const std::string& detail) {
  std::string msg(to_string(code));
  if (!detail.empty()) {
    msg += ": ";
    msg += detail;
  }
  return msg;
}
}  // namespace

Error::Error(ErrorCode code, std::string detail)
    : std::runtime_error(compose(code, detail)), code_(code), detail_(std::move(detail)) {}

StageError::StageError(std::string stage, const Error& cause)
    : Error(cause.code(), "stage " + stage + ": " + cause.detail()), stage_(std::move(stage)) {}

}  // namespace harvest
