#include "tvdigest/service/document.hpp"

#include "tvdigest/core/json.hpp"
#include "tvdigest/evaluation/evaluation.hpp"

namespace tvdigest::service {

nlohmann::json label_document(const DigestLabel& label) {
  nlohmann::json doc = to_json(label);
  doc["chart"] = evaluation::to_json(evaluation::chart_data(label.evaluation));
  return doc;
}

std::string label_bytes(const DigestLabel& label) {
  return canonical_dump(label_document(label));
}

DigestLabel parse_label_document(const std::string& bytes) {
  auto j = nlohmann::json::parse(bytes, nullptr, false);
  if (j.is_discarded()) {
    throw Error(ErrorCode::kSchemaViolation, "label: invalid JSON");
  }
  return label_from_json(j);
}

nlohmann::json source_projection(const DigestLabel& label,
                                 const RepositoryId& source) {
  auto it = label.per_source.find(source);
  if (it == label.per_source.end()) {
    throw Error(ErrorCode::kNotFound,
                source.str() + " contributed nothing to " + label.cve_id.str());
  }
  nlohmann::json doc = label_document(label);
  doc.erase("merged");
  doc.erase("per_source");
  doc["source"] = source.str();
  doc["aspects"] = to_json(it->second);
  return doc;
}

}  // namespace tvdigest::service
