#pragma once

#include <filesystem>
#include <memory>
#include <nlohmann/json.hpp>
#include <optional>
#include <string>

#include "tvdigest/providers/provider.hpp"

namespace tvdigest::providers {

struct ProviderConfig {
  std::string kind = "mock";  // "http" | "mock"
  std::string endpoint;
  std::string embedding_endpoint;
  std::string api_key_env;
  std::string model;
  std::size_t dimension = 64;
  std::ptrdiff_t max_in_flight = 4;
  /// Mock only: ProviderScript file. Without one the mock is the
  /// RecombinationProvider with a hashed bag-of-words embedder.
  std::optional<std::filesystem::path> script;

  /// Parses the "provider" object. Relative script paths resolve against
  /// `base_dir`.
  static ProviderConfig from_json(const nlohmann::json& j,
                                  const std::filesystem::path& base_dir = {});
};

struct ProviderBundle {
  std::unique_ptr<CompletionProvider> llm;
  std::unique_ptr<Embedder> embedder;
};

/// The API key is read from the environment variable named by
/// api_key_env, never from the config file.
ProviderBundle make_providers(const ProviderConfig& cfg);

}  // namespace tvdigest::providers
