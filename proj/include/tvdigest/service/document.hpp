#pragma once

#include <nlohmann/json.hpp>
#include <string>

#include "tvdigest/core/model.hpp"

namespace tvdigest::service {

/// Full label document: the label fields plus backend-computed "chart"
/// data. The chart is derived, so reading ignores it.
nlohmann::json label_document(const DigestLabel& label);
std::string label_bytes(const DigestLabel& label);

/// Parses and validates a label document (kSchemaViolation on failure).
DigestLabel parse_label_document(const std::string& bytes);

/// Per-repository tab: shared header and evaluation plus the aspects that
/// repository contributed. Throws kNotFound for a repository not in
/// per_source.
nlohmann::json source_projection(const DigestLabel& label,
                                 const RepositoryId& source);

}  // namespace tvdigest::service
