#include "tvdigest/service/app_config.hpp"

#include <fstream>

namespace tvdigest::service {

namespace fs = std::filesystem;

AppConfig AppConfig::from_json(const nlohmann::json& j, const fs::path& base_dir) {
  if (!j.is_object()) {
    throw Error(ErrorCode::kConfigError, "config must be a JSON object");
  }
  auto resolve = [&](const nlohmann::json& v) {
    fs::path p = v.get<std::string>();
    return p.is_absolute() ? p : base_dir / p;
  };
  AppConfig cfg;
  if (auto it = j.find("provider"); it != j.end()) {
    cfg.provider = providers::ProviderConfig::from_json(*it, base_dir);
  }
  if (auto it = j.find("repositories"); it != j.end()) {
    cfg.repositories = ingestion::repo_configs_from_json(*it);
  }
  if (auto it = j.find("pipeline"); it != j.end()) {
    cfg.pipeline = PipelineConfig::from_json(*it);
  }
  if (auto it = j.find("templates"); it != j.end() && it->is_string()) {
    cfg.templates = extraction::load_templates(resolve(*it));
  }
  if (auto it = j.find("merge_examples"); it != j.end() && it->is_string()) {
    cfg.merge_examples = fusion::load_merge_examples(resolve(*it));
  }
  return cfg;
}

AppConfig AppConfig::load(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIoError, "cannot open config " + path.string());
  auto j = nlohmann::json::parse(in, nullptr, false);
  if (j.is_discarded()) {
    throw Error(ErrorCode::kConfigError, path.string() + ": invalid JSON");
  }
  return from_json(j, path.parent_path());
}

}  // namespace tvdigest::service
