#include "tvdigest/core/error.hpp"

namespace tvdigest {

std::string_view error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument: return "invalid_argument";
    case ErrorCode::kMalformedCveId: return "malformed_cve_id";
    case ErrorCode::kInvalidRepository: return "invalid_repository";
    case ErrorCode::kProviderUnavailable: return "provider_unavailable";
    case ErrorCode::kScriptExhausted: return "script_exhausted";
    case ErrorCode::kResponseTooLong: return "response_too_long";
    case ErrorCode::kEmptyText: return "empty_text";
    case ErrorCode::kDimensionMismatch: return "dimension_mismatch";
    case ErrorCode::kFetchFailed: return "fetch_failed";
    case ErrorCode::kMalformedResponse: return "malformed_response";
    case ErrorCode::kParseError: return "parse_error";
    case ErrorCode::kDuplicateRecord: return "duplicate_record";
    case ErrorCode::kMissingTemplate: return "missing_template";
    case ErrorCode::kUnparseableResponse: return "unparseable_response";
    case ErrorCode::kTooFewValues: return "too_few_values";
    case ErrorCode::kNoExamples: return "no_examples";
    case ErrorCode::kEmptyInput: return "empty_input";
    case ErrorCode::kEmptyCorpus: return "empty_corpus";
    case ErrorCode::kNoSources: return "no_sources";
    case ErrorCode::kNotFound: return "not_found";
    case ErrorCode::kSchemaViolation: return "schema_violation";
    case ErrorCode::kIoError: return "io_error";
    case ErrorCode::kConfigError: return "config_error";
  }
  return "unknown";
}

bool is_provider_error(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::kProviderUnavailable:
    case ErrorCode::kScriptExhausted:
    case ErrorCode::kResponseTooLong:
    case ErrorCode::kEmptyText:
    case ErrorCode::kDimensionMismatch:
      return true;
    default:
      return false;
  }
}

}  // namespace tvdigest
