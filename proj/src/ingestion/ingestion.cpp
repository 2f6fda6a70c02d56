#include "tvdigest/ingestion/ingestion.hpp"

#include <httplib.h>

#include <algorithm>
#include <fstream>
#include <regex>
#include <set>
#include <sstream>
#include <thread>

#include "tvdigest/core/json.hpp"

namespace tvdigest::ingestion {

namespace {

constexpr std::string_view kPlaceholder = "{cve_id}";
constexpr int kFetchAttempts = 3;

std::size_t count_occurrences(std::string_view haystack,
                              std::string_view needle) {
  std::size_t n = 0;
  for (auto pos = haystack.find(needle); pos != std::string_view::npos;
       pos = haystack.find(needle, pos + needle.size())) {
    ++n;
  }
  return n;
}

class HttplibGetter final : public HttpGetter {
 public:
  explicit HttplibGetter(std::chrono::seconds timeout) : timeout_(timeout) {}

  HttpResult get(const std::string& url,
                 const std::vector<std::pair<std::string, std::string>>&
                     headers) override {
    static const std::regex kUrl(R"(^(https?://[^/\s]+)(/[^\s]*)?$)");
    std::smatch m;
    if (!std::regex_match(url, m, kUrl)) return {0, "invalid URL " + url};
    httplib::Client client(m[1].str());
    client.set_connection_timeout(timeout_);
    client.set_read_timeout(timeout_);
    client.set_follow_location(true);
    httplib::Headers h(headers.begin(), headers.end());
    auto res = client.Get(m[2].matched ? m[2].str() : "/", h);
    if (!res) return {0, httplib::to_string(res.error())};
    return {res->status, res->body};
  }

 private:
  std::chrono::seconds timeout_;
};

}  // namespace

RepoClientConfig RepoClientConfig::from_json(const nlohmann::json& j) {
  RepoClientConfig cfg;
  try {
    cfg.repo = RepositoryId::parse(j.at("repo").get<std::string>());
    cfg.base_url = j.at("base_url").get<std::string>();
    cfg.response_path = j.at("response_path").get<std::string>();
    cfg.cvss_path = j.value("cvss_path", "");
    cfg.lang = j.value("lang", "en");
    cfg.rate_limit = j.value("rate_limit", 1.0);
    cfg.auth_header = j.value("auth_header", "");
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kConfigError,
                std::string("malformed repository config: ") + e.what());
  }
  if (count_occurrences(cfg.base_url, kPlaceholder) != 1) {
    throw Error(ErrorCode::kConfigError,
                "base_url must contain {cve_id} exactly once: " + cfg.base_url);
  }
  if (cfg.response_path.empty()) {
    throw Error(ErrorCode::kConfigError, "response_path is empty");
  }
  return cfg;
}

std::string RepoClientConfig::url_for(const CveId& cve) const {
  std::string url = base_url;
  url.replace(url.find(kPlaceholder), kPlaceholder.size(), cve.str());
  return url;
}

std::vector<RepoClientConfig> repo_configs_from_json(const nlohmann::json& arr) {
  if (!arr.is_array()) {
    throw Error(ErrorCode::kConfigError, "\"repositories\" must be an array");
  }
  std::vector<RepoClientConfig> out;
  for (const auto& j : arr) out.push_back(RepoClientConfig::from_json(j));
  return out;
}

std::unique_ptr<HttpGetter> make_http_getter(std::chrono::seconds timeout) {
  return std::make_unique<HttplibGetter>(timeout);
}

RateLimiter::RateLimiter(double per_second)
    : interval_(per_second > 0
                    ? std::chrono::duration_cast<std::chrono::steady_clock::duration>(
                          std::chrono::duration<double>(1.0 / per_second))
                    : std::chrono::steady_clock::duration::zero()) {}

void RateLimiter::acquire() {
  std::chrono::steady_clock::time_point slot;
  {
    std::lock_guard lock(mu_);
    auto now = std::chrono::steady_clock::now();
    slot = std::max(now, next_);
    next_ = slot + interval_;
  }
  std::this_thread::sleep_until(slot);
}

const nlohmann::json* resolve_path(const nlohmann::json& doc,
                                   std::string_view dot_path) {
  const nlohmann::json* cur = &doc;
  std::size_t start = 0;
  while (start <= dot_path.size()) {
    auto end = dot_path.find('.', start);
    if (end == std::string_view::npos) end = dot_path.size();
    std::string key(dot_path.substr(start, end - start));
    if (cur->is_object()) {
      auto it = cur->find(key);
      if (it == cur->end()) return nullptr;
      cur = &*it;
    } else if (cur->is_array() && !key.empty() &&
               std::all_of(key.begin(), key.end(), ::isdigit)) {
      std::size_t i = std::stoul(key);
      if (i >= cur->size()) return nullptr;
      cur = &(*cur)[i];
    } else {
      return nullptr;
    }
    start = end + 1;
  }
  return cur;
}

Tvd fetch_tvd(const CveId& cve, const RepoClientConfig& cfg, HttpGetter& http,
              RateLimiter* limiter, std::function<Timestamp()> clock) {
  const std::string url = cfg.url_for(cve);
  std::vector<std::pair<std::string, std::string>> headers;
  if (auto colon = cfg.auth_header.find(':'); colon != std::string::npos) {
    std::string value = cfg.auth_header.substr(colon + 1);
    value.erase(0, value.find_first_not_of(' '));
    headers.emplace_back(cfg.auth_header.substr(0, colon), value);
  }
  Tvd tvd{cve, cfg.repo, "", cfg.lang, clock(), std::nullopt};
  std::string last;
  for (int attempt = 0; attempt < kFetchAttempts; ++attempt) {
    if (limiter != nullptr) limiter->acquire();
    HttpResult res = http.get(url, headers);
    if (res.status == 404) return tvd;
    if (res.status < 200 || res.status >= 300) {
      last = res.status == 0 ? "transport error: " + res.body
                             : "HTTP " + std::to_string(res.status);
      continue;
    }
    auto doc = nlohmann::json::parse(res.body, nullptr, false);
    if (doc.is_discarded()) {
      throw Error(ErrorCode::kMalformedResponse, url + ": body is not JSON");
    }
    const nlohmann::json* field = resolve_path(doc, cfg.response_path);
    if (field == nullptr || !(field->is_string() || field->is_null())) {
      throw Error(ErrorCode::kMalformedResponse,
                  url + ": no string at '" + cfg.response_path + "'");
    }
    if (field->is_string()) tvd.text = field->get<std::string>();
    if (!cfg.cvss_path.empty()) {
      const nlohmann::json* score = resolve_path(doc, cfg.cvss_path);
      if (score != nullptr && score->is_number()) {
        double v = score->get<double>();
        if (v >= 0.0 && v <= 10.0) tvd.cvss = v;
      }
    }
    return tvd;
  }
  throw Error(ErrorCode::kFetchFailed,
              url + " failed after " + std::to_string(kFetchAttempts) +
                  " attempts: " + last);
}

Tvd identity_translation(Tvd tvd) { return tvd; }

std::vector<Tvd> parse_corpus(std::istream& in, const std::string& source_name) {
  std::vector<Tvd> out;
  std::map<std::pair<CveId, RepositoryId>, std::size_t> seen;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const std::string where = source_name + ":" + std::to_string(line_no);
    auto j = nlohmann::json::parse(line, nullptr, false);
    if (j.is_discarded()) {
      throw Error(ErrorCode::kParseError, where + ": invalid JSON");
    }
    Tvd tvd = [&] {
      try {
        return parse_record(j);
      } catch (const Error& e) {
        throw Error(ErrorCode::kParseError, where + ": " + e.what());
      }
    }();
    auto key = std::make_pair(tvd.cve_id, tvd.repo);
    if (auto it = seen.find(key); it != seen.end()) {
      throw Error(ErrorCode::kDuplicateRecord,
                  where + ": duplicate record (" + tvd.cve_id.str() + ", " +
                      tvd.repo.str() + "), first seen on line " +
                      std::to_string(it->second));
    }
    seen.emplace(key, line_no);
    out.push_back(std::move(tvd));
  }
  return out;
}

std::vector<Tvd> load_corpus(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIoError, "cannot open " + path.string());
  return parse_corpus(in, path.string());
}

std::string serialize_corpus(const std::vector<Tvd>& tvds) {
  std::string out;
  for (const auto& t : tvds) {
    out += serialize_record(t);
    out.push_back('\n');
  }
  return out;
}

void save_corpus(const std::filesystem::path& path,
                 const std::vector<Tvd>& tvds) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIoError, "cannot write " + path.string());
  out << serialize_corpus(tvds);
  if (!out) throw Error(ErrorCode::kIoError, "write failed: " + path.string());
}

std::map<CveId, std::vector<Tvd>> group_by_cve(const std::vector<Tvd>& tvds) {
  std::map<CveId, std::vector<Tvd>> groups;
  for (const auto& t : tvds) groups[t.cve_id].push_back(t);
  for (auto& [_, list] : groups) {
    std::stable_sort(list.begin(), list.end(),
                     [](const Tvd& a, const Tvd& b) { return a.repo < b.repo; });
  }
  return groups;
}

}  // namespace tvdigest::ingestion
