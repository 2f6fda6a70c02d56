#include "tvdigest/providers/http.hpp"

#include <httplib.h>

#include <nlohmann/json.hpp>
#include <regex>

namespace tvdigest::providers {
namespace {

class SlotGuard {
 public:
  explicit SlotGuard(std::counting_semaphore<1024>& sem) : sem_(sem) {
    sem_.acquire();
  }
  ~SlotGuard() { sem_.release(); }
  SlotGuard(const SlotGuard&) = delete;
  SlotGuard& operator=(const SlotGuard&) = delete;

 private:
  std::counting_semaphore<1024>& sem_;
};

std::ptrdiff_t clamp_slots(std::ptrdiff_t n) {
  return std::clamp<std::ptrdiff_t>(n, 1, 1024);
}

/// POSTs `body` with up to `attempts` tries. Transport failures, 429 and
/// 5xx are retried; other non-2xx statuses fail immediately.
nlohmann::json post_json(const HttpEndpoint& ep, const HttpProviderOptions& opts,
                         const nlohmann::json& body, const std::string& tag) {
  httplib::Client client(ep.scheme_host_port);
  client.set_connection_timeout(opts.timeout);
  client.set_read_timeout(opts.timeout);
  httplib::Headers headers;
  if (!opts.api_key.empty()) {
    headers.emplace("Authorization", "Bearer " + opts.api_key);
  }
  std::string payload = body.dump();
  std::string last_error = "no attempt made";
  for (int attempt = 0; attempt < std::max(1, opts.attempts); ++attempt) {
    auto res = client.Post(ep.path, headers, payload, "application/json");
    if (!res) {
      last_error = "transport error: " + httplib::to_string(res.error());
      continue;
    }
    if (res->status >= 200 && res->status < 300) {
      auto j = nlohmann::json::parse(res->body, nullptr, false);
      if (j.is_discarded()) {
        throw ProviderError(ErrorCode::kProviderUnavailable,
                            "provider returned non-JSON body", tag);
      }
      return j;
    }
    last_error = "HTTP " + std::to_string(res->status);
    if (res->status != 429 && res->status < 500) break;
  }
  throw ProviderError(ErrorCode::kProviderUnavailable,
                      ep.scheme_host_port + ep.path + ": " + last_error, tag);
}

}  // namespace

HttpEndpoint HttpEndpoint::parse(const std::string& url) {
  static const std::regex kUrl(R"(^(https?://[^/\s]+)(/[^\s]*)?$)");
  std::smatch m;
  if (!std::regex_match(url, m, kUrl)) {
    throw Error(ErrorCode::kConfigError, "invalid endpoint URL '" + url + "'");
  }
  return {m[1].str(), m[2].matched ? m[2].str() : "/"};
}

HttpCompletionProvider::HttpCompletionProvider(HttpProviderOptions opts)
    : opts_(std::move(opts)),
      endpoint_(HttpEndpoint::parse(opts_.endpoint)),
      in_flight_(clamp_slots(opts_.max_in_flight)) {}

HttpCompletionProvider::~HttpCompletionProvider() = default;

std::string HttpCompletionProvider::do_complete(const CompletionRequest& req) {
  SlotGuard slot(in_flight_);
  nlohmann::json body = {
      {"model", opts_.model},
      {"messages", {{{"role", "user"}, {"content", req.prompt}}}},
      {"temperature", req.temperature},
      {"max_tokens", req.max_tokens}};
  nlohmann::json res = post_json(endpoint_, opts_, body, req.tag);
  const auto& choices = res.value("choices", nlohmann::json::array());
  if (!choices.is_array() || choices.empty()) {
    throw ProviderError(ErrorCode::kProviderUnavailable,
                        "completion response has no choices", req.tag);
  }
  const auto& choice = choices.front();
  if (choice.value("finish_reason", "") == "length") {
    throw ProviderError(ErrorCode::kResponseTooLong,
                        "completion truncated at max_tokens", req.tag);
  }
  if (auto msg = choice.find("message");
      msg != choice.end() && msg->contains("content") &&
      (*msg)["content"].is_string()) {
    return (*msg)["content"].get<std::string>();
  }
  if (auto text = choice.find("text"); text != choice.end() && text->is_string()) {
    return text->get<std::string>();
  }
  throw ProviderError(ErrorCode::kProviderUnavailable,
                      "completion response has no content", req.tag);
}

HttpEmbedder::HttpEmbedder(HttpProviderOptions opts, std::size_t dimension)
    : opts_(std::move(opts)),
      endpoint_(HttpEndpoint::parse(opts_.endpoint)),
      dimension_(dimension),
      in_flight_(clamp_slots(opts_.max_in_flight)) {}

EmbeddingVector HttpEmbedder::embed(std::string_view text) {
  if (text.empty()) {
    throw ProviderError(ErrorCode::kEmptyText, "cannot embed empty text");
  }
  SlotGuard slot(in_flight_);
  nlohmann::json res = post_json(
      endpoint_, opts_, {{"model", opts_.model}, {"input", std::string(text)}},
      "embed");
  try {
    auto values =
        res.at("data").at(0).at("embedding").get<std::vector<double>>();
    if (values.size() != dimension_) {
      throw ProviderError(ErrorCode::kDimensionMismatch,
                          "embedding has dimension " +
                              std::to_string(values.size()) + ", expected " +
                              std::to_string(dimension_),
                          "embed");
    }
    return EmbeddingVector(std::move(values));
  } catch (const nlohmann::json::exception& e) {
    throw ProviderError(ErrorCode::kProviderUnavailable,
                        std::string("malformed embedding response: ") + e.what(),
                        "embed");
  }
}

}  // namespace tvdigest::providers
