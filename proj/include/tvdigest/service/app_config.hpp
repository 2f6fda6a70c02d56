#pragma once

#include <filesystem>
#include <nlohmann/json.hpp>
#include <optional>
#include <vector>

#include "tvdigest/extraction/extraction.hpp"
#include "tvdigest/fusion/fusion.hpp"
#include "tvdigest/ingestion/ingestion.hpp"
#include "tvdigest/providers/config.hpp"
#include "tvdigest/service/pipeline.hpp"

namespace tvdigest::service {

/// Top-level config file: {"provider": {...}, "repositories": [...],
/// "pipeline": {...}, "templates": path, "merge_examples": path}.
struct AppConfig {
  providers::ProviderConfig provider;
  std::vector<ingestion::RepoClientConfig> repositories;
  PipelineConfig pipeline;
  std::vector<extraction::RegularizationTemplate> templates =
      extraction::default_templates();
  std::vector<fusion::MergeExample> merge_examples =
      fusion::default_merge_examples();

  static AppConfig from_json(const nlohmann::json& j,
                             const std::filesystem::path& base_dir = {});
  static AppConfig load(const std::filesystem::path& path);
};

}  // namespace tvdigest::service
