#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <mutex>
#include <nlohmann/json.hpp>
#include <string>
#include <vector>

#include "tvdigest/providers/provider.hpp"

namespace tvdigest::providers {

enum class EmbeddingMode { kHashedBagOfWords, kTable };

struct ScriptEntry {
  std::string tag;        // empty matches any tag
  std::string substring;  // empty matches any prompt
  std::string response;
};

struct ProviderScript {
  std::vector<ScriptEntry> entries;
  EmbeddingMode embedding_mode = EmbeddingMode::kHashedBagOfWords;
  /// Only consulted in table mode; keyed by text::fold of the input.
  std::map<std::string, std::vector<double>> embedding_table;

  static ProviderScript from_json(const nlohmann::json& j);
  static ProviderScript load(const std::filesystem::path& path);
  nlohmann::json to_json() const;
};

/// Replays a ProviderScript. Each request consumes the first unconsumed
/// entry whose tag and prompt substring match; no match is
/// ProviderError(kScriptExhausted).
class ScriptedProvider final : public CompletionProvider {
 public:
  explicit ScriptedProvider(ProviderScript script);

  std::size_t remaining() const;
  /// Tags of every answered request, in order.
  std::vector<std::string> history() const;

 protected:
  std::string do_complete(const CompletionRequest& req) override;

 private:
  mutable std::mutex mu_;
  std::vector<ScriptEntry> entries_;
  std::vector<bool> consumed_;
  std::vector<std::string> history_;
};

std::uint64_t fnv1a64(std::string_view bytes);

/// Each normalized token hashed with FNV-1a 64 into one of D buckets,
/// counts accumulated, then L2-normalized unless all-zero.
class HashedBagEmbedder final : public Embedder {
 public:
  explicit HashedBagEmbedder(std::size_t dimension = 64);

  EmbeddingVector embed(std::string_view text) override;
  std::size_t dimension() const override { return dimension_; }

  std::size_t bucket(std::string_view token) const {
    return static_cast<std::size_t>(fnv1a64(token) % dimension_);
  }

 private:
  std::size_t dimension_;
};

/// Fixed lookup table; unknown text is ProviderError(kProviderUnavailable).
class TableEmbedder final : public Embedder {
 public:
  explicit TableEmbedder(std::map<std::string, std::vector<double>> table);

  EmbeddingVector embed(std::string_view text) override;
  std::size_t dimension() const override { return dimension_; }

 private:
  std::map<std::string, EmbeddingVector> table_;
  std::size_t dimension_ = 0;
};

/// Offline provider that never invents words. Merge prompts are answered
/// by concatenating the prompt's final sentence list; anchor prompts by the
/// distinct tokens of the sentence. Anything else is forwarded to
/// `fallback` when set, otherwise kScriptExhausted.
class RecombinationProvider final : public CompletionProvider {
 public:
  explicit RecombinationProvider(CompletionProvider* fallback = nullptr)
      : fallback_(fallback) {}

 protected:
  std::string do_complete(const CompletionRequest& req) override;

 private:
  CompletionProvider* fallback_;
};

}  // namespace tvdigest::providers
