#include "tvdigest/providers/config.hpp"

#include <cstdlib>

#include "tvdigest/providers/http.hpp"
#include "tvdigest/providers/mock.hpp"

namespace tvdigest::providers {

ProviderConfig ProviderConfig::from_json(const nlohmann::json& j,
                                         const std::filesystem::path& base_dir) {
  ProviderConfig cfg;
  try {
    cfg.kind = j.value("kind", "mock");
    cfg.endpoint = j.value("endpoint", "");
    cfg.embedding_endpoint = j.value("embedding_endpoint", "");
    cfg.api_key_env = j.value("api_key_env", "");
    cfg.model = j.value("model", "");
    cfg.dimension = j.value("dimension", std::size_t{64});
    cfg.max_in_flight = j.value("max_in_flight", std::ptrdiff_t{4});
    if (auto s = j.find("script"); s != j.end() && !s->is_null()) {
      std::filesystem::path p = s->get<std::string>();
      cfg.script = p.is_absolute() ? p : base_dir / p;
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kConfigError,
                std::string("malformed provider config: ") + e.what());
  }
  if (cfg.kind != "http" && cfg.kind != "mock") {
    throw Error(ErrorCode::kConfigError,
                "provider.kind must be \"http\" or \"mock\"");
  }
  if (cfg.dimension < 8) {
    throw Error(ErrorCode::kConfigError, "provider.dimension must be >= 8");
  }
  if (cfg.kind == "http" && cfg.endpoint.empty()) {
    throw Error(ErrorCode::kConfigError, "http provider needs an endpoint");
  }
  return cfg;
}

ProviderBundle make_providers(const ProviderConfig& cfg) {
  ProviderBundle bundle;
  if (cfg.kind == "http") {
    HttpProviderOptions opts;
    opts.endpoint = cfg.endpoint;
    opts.model = cfg.model;
    opts.max_in_flight = cfg.max_in_flight;
    if (!cfg.api_key_env.empty()) {
      if (const char* key = std::getenv(cfg.api_key_env.c_str())) {
        opts.api_key = key;
      }
    }
    bundle.llm = std::make_unique<HttpCompletionProvider>(opts);
    if (!cfg.embedding_endpoint.empty()) {
      HttpProviderOptions emb = opts;
      emb.endpoint = cfg.embedding_endpoint;
      bundle.embedder = std::make_unique<HttpEmbedder>(emb, cfg.dimension);
    } else {
      bundle.embedder = std::make_unique<HashedBagEmbedder>(cfg.dimension);
    }
    return bundle;
  }
  if (cfg.script) {
    ProviderScript script = ProviderScript::load(*cfg.script);
    if (script.embedding_mode == EmbeddingMode::kTable) {
      bundle.embedder = std::make_unique<TableEmbedder>(script.embedding_table);
    } else {
      bundle.embedder = std::make_unique<HashedBagEmbedder>(cfg.dimension);
    }
    bundle.llm = std::make_unique<ScriptedProvider>(std::move(script));
  } else {
    bundle.llm = std::make_unique<RecombinationProvider>();
    bundle.embedder = std::make_unique<HashedBagEmbedder>(cfg.dimension);
  }
  return bundle;
}

}  // namespace tvdigest::providers
