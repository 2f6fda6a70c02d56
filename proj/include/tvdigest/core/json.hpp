#pragma once

#include <nlohmann/json.hpp>
#include <string>

#include "tvdigest/core/model.hpp"

namespace tvdigest {

inline constexpr int kLabelSchemaVersion = 1;

nlohmann::json to_json(const KeyAspect& a);
nlohmann::json to_json(const AspectSet& s);
nlohmann::json to_json(const EvaluationScores& s);
nlohmann::json to_json(const BasicInfo& b);
nlohmann::json to_json(const DigestLabel& label);

AspectSet aspect_set_from_json(const CveId& cve, const nlohmann::json& j);
EvaluationScores evaluation_from_json(const nlohmann::json& j);
BasicInfo basic_info_from_json(const nlohmann::json& j);

/// Throws Error(kSchemaViolation) naming the offending field.
DigestLabel label_from_json(const nlohmann::json& j);

/// Sorted keys, UTF-8, compact, no trailing newline.
std::string canonical_dump(const nlohmann::json& j);

/// One JSONL corpus line with key order cve_id, repo, text, lang,
/// retrieved_at (then cvss when present).
std::string serialize_record(const Tvd& tvd);
Tvd parse_record(const nlohmann::json& j);

}  // namespace tvdigest
