#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace tvdigest {

enum class ErrorCode {
  kInvalidArgument,
  kMalformedCveId,
  kInvalidRepository,
  kProviderUnavailable,
  kScriptExhausted,
  kResponseTooLong,
  kEmptyText,
  kDimensionMismatch,
  kFetchFailed,
  kMalformedResponse,
  kParseError,
  kDuplicateRecord,
  kMissingTemplate,
  kUnparseableResponse,
  kTooFewValues,
  kNoExamples,
  kEmptyInput,
  kEmptyCorpus,
  kNoSources,
  kNotFound,
  kSchemaViolation,
  kIoError,
  kConfigError,
};

std::string_view error_code_name(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

/// Raised by completion and embedding providers. `stage` carries the
/// pipeline tag of the request that failed (empty outside a pipeline).
class ProviderError : public Error {
 public:
  ProviderError(ErrorCode code, const std::string& message,
                std::string stage = {})
      : Error(code, message), stage_(std::move(stage)) {}

  const std::string& stage() const noexcept { return stage_; }

 private:
  std::string stage_;
};

/// True for the codes that originate in a model provider.
bool is_provider_error(ErrorCode code) noexcept;

}  // namespace tvdigest
