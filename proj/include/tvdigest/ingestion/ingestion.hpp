#pragma once

#include <chrono>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <nlohmann/json.hpp>
#include <optional>
#include <string>
#include <vector>

#include "tvdigest/core/model.hpp"

namespace tvdigest::ingestion {

struct RepoClientConfig {
  RepositoryId repo = RepositoryId::cve();
  /// Must contain "{cve_id}" exactly once.
  std::string base_url;
  /// Dot path to the description string, e.g. "desc.en".
  std::string response_path;
  /// Optional dot path to a numeric CVSS score.
  std::string cvss_path;
  std::string lang = "en";
  double rate_limit = 1.0;  // requests per second; <= 0 disables
  /// Static header token ("Name: value"), optional.
  std::string auth_header;

  static RepoClientConfig from_json(const nlohmann::json& j);
  std::string url_for(const CveId& cve) const;
};

std::vector<RepoClientConfig> repo_configs_from_json(const nlohmann::json& arr);

struct HttpResult {
  int status = 0;  // 0 = transport failure
  std::string body;
};

/// Transport seam so tests can serve canned responses.
class HttpGetter {
 public:
  virtual ~HttpGetter() = default;
  virtual HttpResult get(const std::string& url,
                         const std::vector<std::pair<std::string, std::string>>&
                             headers) = 0;
};

/// cpp-httplib backed getter.
std::unique_ptr<HttpGetter> make_http_getter(
    std::chrono::seconds timeout = std::chrono::seconds(30));

/// Enforces a minimum interval between requests to one repository.
class RateLimiter {
 public:
  explicit RateLimiter(double per_second);
  void acquire();

 private:
  std::mutex mu_;
  std::chrono::steady_clock::duration interval_;
  std::chrono::steady_clock::time_point next_{};
};

/// Resolves a dot path in a JSON document; nullptr when any step is
/// missing.
const nlohmann::json* resolve_path(const nlohmann::json& doc,
                                   std::string_view dot_path);

/// Fetches one TVD. HTTP 404 yields empty text. Other failures are retried
/// (3 attempts) then raise kFetchFailed; a missing path is
/// kMalformedResponse.
Tvd fetch_tvd(const CveId& cve, const RepoClientConfig& cfg, HttpGetter& http,
              RateLimiter* limiter = nullptr,
              std::function<Timestamp()> clock = Timestamp::now);

/// Pre-processing hook for non-English TVDs. The default leaves the TVD
/// untouched.
using TranslationHook = std::function<Tvd(Tvd)>;
Tvd identity_translation(Tvd tvd);

/// Reads a JSONL corpus. Blank lines are skipped. Errors: kParseError with
/// the line number, kDuplicateRecord for a repeated (cve_id, repo).
std::vector<Tvd> load_corpus(const std::filesystem::path& path);
std::vector<Tvd> parse_corpus(std::istream& in,
                              const std::string& source_name = "<stream>");

/// One canonical line per record, newline-terminated.
std::string serialize_corpus(const std::vector<Tvd>& tvds);
void save_corpus(const std::filesystem::path& path,
                 const std::vector<Tvd>& tvds);

/// Groups by CVE; each group ordered CVE, IBM, CNNVD, JVN, customs
/// alphabetically (stable for equal repositories).
std::map<CveId, std::vector<Tvd>> group_by_cve(const std::vector<Tvd>& tvds);

}  // namespace tvdigest::ingestion
