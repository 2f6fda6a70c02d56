#pragma once

#include <chrono>
#include <memory>
#include <semaphore>
#include <string>

#include "tvdigest/providers/provider.hpp"

namespace tvdigest::providers {

struct HttpEndpoint {
  std::string scheme_host_port;  // "https://api.example.com:443"
  std::string path;              // "/v1/chat/completions"

  /// Throws Error(kConfigError) for anything but http(s)://host[:port]/path.
  static HttpEndpoint parse(const std::string& url);
};

struct HttpProviderOptions {
  std::string endpoint;
  std::string model;
  std::string api_key;  // sent as "Authorization: Bearer <key>" when set
  std::ptrdiff_t max_in_flight = 4;
  int attempts = 3;
  std::chrono::seconds timeout{60};
};

/// Generic chat-completion client: POST {model, messages, temperature,
/// max_tokens}; reads choices[0].message.content (or choices[0].text).
class HttpCompletionProvider final : public CompletionProvider {
 public:
  explicit HttpCompletionProvider(HttpProviderOptions opts);
  ~HttpCompletionProvider() override;

 protected:
  std::string do_complete(const CompletionRequest& req) override;

 private:
  HttpProviderOptions opts_;
  HttpEndpoint endpoint_;
  std::counting_semaphore<1024> in_flight_;
};

/// POST {model, input}; reads data[0].embedding.
class HttpEmbedder final : public Embedder {
 public:
  HttpEmbedder(HttpProviderOptions opts, std::size_t dimension);

  EmbeddingVector embed(std::string_view text) override;
  std::size_t dimension() const override { return dimension_; }

 private:
  HttpProviderOptions opts_;
  HttpEndpoint endpoint_;
  std::size_t dimension_;
  std::counting_semaphore<1024> in_flight_;
};

}  // namespace tvdigest::providers
