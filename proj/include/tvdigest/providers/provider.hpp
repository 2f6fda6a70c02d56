#pragma once

#include <atomic>
#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "tvdigest/core/error.hpp"

namespace tvdigest::providers {

inline constexpr double kDefaultTemperature = 0.8;
inline constexpr int kDefaultMaxTokens = 4096;

struct CompletionRequest {
  std::string prompt;
  int max_tokens = kDefaultMaxTokens;
  double temperature = kDefaultTemperature;
  /// Pipeline stage label ("extract", "anchor", "merge", ...).
  std::string tag;
};

/// Throws Error(kInvalidArgument) on an empty prompt, non-positive
/// max_tokens or negative temperature.
void check_request(const CompletionRequest& req);

class EmbeddingVector {
 public:
  EmbeddingVector() = default;
  explicit EmbeddingVector(std::vector<double> values);
  static EmbeddingVector zeros(std::size_t dimension);

  std::size_t dimension() const noexcept { return values_.size(); }
  std::span<const double> values() const noexcept { return values_; }
  double operator[](std::size_t i) const { return values_[i]; }
  double norm() const;

  friend bool operator==(const EmbeddingVector&,
                         const EmbeddingVector&) = default;

 private:
  std::vector<double> values_;
};

/// Standard cosine similarity; 0.0 when either side has zero norm.
/// Throws ProviderError(kDimensionMismatch) for differing dimensions.
double cosine(const EmbeddingVector& u, const EmbeddingVector& v);

/// Text completion. Implementations must be safe for concurrent calls.
class CompletionProvider {
 public:
  virtual ~CompletionProvider() = default;

  std::string complete(const CompletionRequest& req) {
    check_request(req);
    calls_.fetch_add(1, std::memory_order_relaxed);
    return do_complete(req);
  }

  std::size_t call_count() const noexcept {
    return calls_.load(std::memory_order_relaxed);
  }

 protected:
  virtual std::string do_complete(const CompletionRequest& req) = 0;

 private:
  std::atomic<std::size_t> calls_{0};
};

/// Sentence embedding with a fixed dimension per instance.
class Embedder {
 public:
  virtual ~Embedder() = default;
  virtual EmbeddingVector embed(std::string_view text) = 0;
  virtual std::size_t dimension() const = 0;
};

}  // namespace tvdigest::providers
