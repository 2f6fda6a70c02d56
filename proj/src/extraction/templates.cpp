#include <fstream>

#include "tvdigest/extraction/extraction.hpp"

namespace tvdigest::extraction {

// Reconstructed from the five aspect definitions and the phrasing common in
// CVE-style descriptions. Treat as data; a registry file replaces it.
std::vector<RegularizationTemplate> default_templates() {
  return {
      {AspectType::kVulnerabilityType,
       "The category or nature of the vulnerability, such as buffer overflow, "
       "SQL injection, use-after-free or cross-site scripting. Usually a noun "
       "phrase naming the weakness class.",
       {"vulnerability", "overflow", "injection", "cross-site scripting",
        "use-after-free", "denial of service vulnerability"},
       "buffer overflow in the XYZ parser"},
      {AspectType::kAttackVector,
       "How an attack can be executed: the channel, input or action the "
       "attacker uses, such as remote network access, a crafted file or a "
       "local application.",
       {"via", "by sending", "through", "crafted", "by using"},
       "via a crafted application"},
      {AspectType::kAttackerType,
       "The assumed capabilities or privileges of the attacker, such as "
       "remote attackers, authenticated users, local users or guest OS users.",
       {"remote attackers", "local users", "guest OS users",
        "authenticated users", "allows", "attackers"},
       "allows guest OS users to"},
      {AspectType::kRootCause,
       "The underlying technical reason leading to the vulnerability, such as "
       "improper opcode handling or incorrect input validation.",
       {"does not properly", "improper", "improperly", "fails to", "because",
        "due to", "unable to"},
       "does not properly handle the 0f05 opcode"},
      {AspectType::kImpact,
       "The consequence of successful exploitation, such as privilege "
       "escalation, denial of service, arbitrary code execution or data "
       "leakage.",
       {"to cause", "denial of service", "execute arbitrary code",
        "obtain sensitive information", "gain privileges", "crash"},
       "cause a denial of service (guest OS crash)"},
  };
}

std::vector<RegularizationTemplate> templates_from_json(const nlohmann::json& j) {
  if (!j.is_array()) {
    throw Error(ErrorCode::kConfigError, "template registry must be an array");
  }
  std::vector<RegularizationTemplate> out;
  for (const auto& item : j) {
    try {
      auto type = aspect_from_name(item.at("aspect_type").get<std::string>());
      if (!type) {
        throw Error(ErrorCode::kConfigError,
                    "unknown aspect_type " + item.at("aspect_type").dump());
      }
      RegularizationTemplate t{
          *type, item.at("pattern_description").get<std::string>(),
          item.at("cue_phrases").get<std::vector<std::string>>(),
          item.value("example_phrasing", "")};
      if (t.cue_phrases.empty()) {
        throw Error(ErrorCode::kConfigError,
                    "template for " + std::string(aspect_name(*type)) +
                        " has no cue phrases");
      }
      out.push_back(std::move(t));
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::kConfigError,
                  std::string("malformed template: ") + e.what());
    }
  }
  return out;
}

nlohmann::json templates_to_json(const std::vector<RegularizationTemplate>& ts) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& t : ts) {
    arr.push_back({{"aspect_type", aspect_name(t.aspect_type)},
                   {"pattern_description", t.pattern_description},
                   {"cue_phrases", t.cue_phrases},
                   {"example_phrasing", t.example_phrasing}});
  }
  return arr;
}

std::vector<RegularizationTemplate> load_templates(
    const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIoError, "cannot open " + path.string());
  auto j = nlohmann::json::parse(in, nullptr, false);
  if (j.is_discarded()) {
    throw Error(ErrorCode::kConfigError, path.string() + ": invalid JSON");
  }
  return templates_from_json(j);
}

}  // namespace tvdigest::extraction
