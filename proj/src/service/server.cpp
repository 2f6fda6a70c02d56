#include "tvdigest/service/server.hpp"

#include <httplib.h>

#include "tvdigest/core/json.hpp"
#include "tvdigest/service/document.hpp"
#include "tvdigest/stats/corpus_stats.hpp"

namespace tvdigest::service {

namespace {

HttpResponse json_response(int status, const nlohmann::json& body) {
  return {status, canonical_dump(body), "application/json"};
}

HttpResponse error_response(int status, std::string_view error,
                            const std::string& message = {}) {
  nlohmann::json body = {{"error", error}};
  if (!message.empty()) body["message"] = message;
  return json_response(status, body);
}

}  // namespace

LabelService::LabelService(const Pipeline& pipeline, Providers providers,
                           LabelStore& store, std::vector<Tvd> corpus,
                           ServiceOptions opts, ingestion::HttpGetter* fetcher)
    : pipeline_(pipeline),
      providers_(providers),
      store_(store),
      corpus_(ingestion::group_by_cve(corpus)),
      opts_(std::move(opts)),
      fetcher_(fetcher) {}

std::vector<Tvd> LabelService::sources_for(const CveId& cve) {
  {
    std::lock_guard lock(corpus_mu_);
    if (auto it = corpus_.find(cve); it != corpus_.end()) return it->second;
  }
  if (fetcher_ == nullptr || opts_.repositories.empty()) return {};
  std::vector<Tvd> fetched;
  for (const auto& repo : opts_.repositories) {
    fetched.push_back(ingestion::fetch_tvd(cve, repo, *fetcher_));
  }
  std::lock_guard lock(corpus_mu_);
  auto grouped = ingestion::group_by_cve(fetched);
  corpus_[cve] = grouped[cve];
  return corpus_[cve];
}

HttpResponse LabelService::post_label(const std::string& body) {
  auto req = nlohmann::json::parse(body, nullptr, false);
  if (req.is_discarded() || !req.is_object() || !req.contains("cve_id") ||
      !req["cve_id"].is_string()) {
    return error_response(422, "malformed_request",
                          "body must be {\"cve_id\": \"CVE-...\"}");
  }
  std::optional<CveId> cve;
  try {
    cve = CveId::parse(req["cve_id"].get<std::string>());
  } catch (const Error& e) {
    return error_response(422, "malformed_cve_id", e.what());
  }
  PipelineConfig cfg = opts_.pipeline;
  try {
    if (auto m = req.find("mode"); m != req.end() && !m->is_null()) {
      cfg.mode = parse_mode(m->get<std::string>());
    }
    if (auto e = req.find("entropy_constraint"); e != req.end()) {
      cfg.entropy_constraint = e->get<bool>();
    }
  } catch (const std::exception& e) {
    return error_response(422, "invalid_option", e.what());
  }

  auto guard = generation_locks_.lock(cve->str());
  try {
    std::vector<Tvd> tvds = sources_for(*cve);
    if (tvds.empty()) {
      return error_response(404, "no_sources",
                            "no TVDs available for " + cve->str());
    }
    DigestLabel label = pipeline_.generate_label(*cve, tvds, cfg, providers_);
    return {201, store_.store(label), "application/json"};
  } catch (const ProviderError& e) {
    nlohmann::json body = {{"error", "provider_error"},
                           {"stage", e.stage()},
                           {"message", e.what()}};
    return json_response(502, body);
  } catch (const Error& e) {
    if (e.code() == ErrorCode::kFetchFailed ||
        e.code() == ErrorCode::kMalformedResponse) {
      return error_response(502, "fetch_failed", e.what());
    }
    return error_response(500, error_code_name(e.code()), e.what());
  }
}

HttpResponse LabelService::get_label(const std::string& cve_id,
                                     const std::optional<std::string>& source) {
  std::optional<CveId> cve;
  try {
    cve = CveId::parse(cve_id);
  } catch (const Error& e) {
    return error_response(422, "malformed_cve_id", e.what());
  }
  try {
    if (!source) return {200, store_.load_bytes(*cve), "application/json"};
    RepositoryId repo = RepositoryId::parse(*source);
    DigestLabel label = store_.load(*cve);
    return json_response(200, source_projection(label, repo));
  } catch (const Error& e) {
    switch (e.code()) {
      case ErrorCode::kNotFound:
        return error_response(404, source && store_.contains(*cve)
                                       ? "unknown_source"
                                       : "not_found");
      case ErrorCode::kInvalidRepository:
        return error_response(422, "invalid_source", e.what());
      default:
        return error_response(500, error_code_name(e.code()), e.what());
    }
  }
}

HttpResponse LabelService::corpus_stats() {
  stats::CorpusAspects groups;
  std::map<CveId, std::map<AspectType, double>> dispersion;
  try {
    for (const auto& cve : store_.list()) {
      DigestLabel label = store_.load(cve);
      groups.emplace(cve, label.per_source);
      for (const auto& [t, d] : label.evaluation.diversity) {
        dispersion[cve][t] = d.dispersion;
      }
    }
  } catch (const Error& e) {
    return error_response(500, error_code_name(e.code()), e.what());
  }
  if (groups.empty()) return json_response(200, {{"cve_count", 0}});
  stats::DispersionFn stored = [&](const CveId& cve,
                                   const std::vector<KeyAspect>& values) {
    if (values.empty()) return 0.0;
    return dispersion[cve][values.front().aspect_type];
  };
  auto metrics = stats::compute_metrics(
      groups, opts_.pipeline.dispersion_threshold, stored);
  return json_response(200, stats::to_json(metrics));
}

LabelServer::LabelServer(LabelService& service)
    : service_(service), server_(std::make_unique<httplib::Server>()) {
  auto send = [](httplib::Response& res, const HttpResponse& r) {
    res.status = r.status;
    res.set_content(r.body, r.content_type);
  };
  server_->Post("/api/v1/labels",
                [this, send](const httplib::Request& req, httplib::Response& res) {
                  send(res, service_.post_label(req.body));
                });
  server_->Get(R"(/api/v1/labels/([^/]+))",
               [this, send](const httplib::Request& req, httplib::Response& res) {
                 std::optional<std::string> source;
                 if (req.has_param("source")) {
                   source = req.get_param_value("source");
                 }
                 send(res, service_.get_label(req.matches[1].str(), source));
               });
  server_->Get("/api/v1/corpus/stats",
               [this, send](const httplib::Request&, httplib::Response& res) {
                 send(res, service_.corpus_stats());
               });
  server_->Get("/healthz", [](const httplib::Request&, httplib::Response& res) {
    res.set_content("ok", "text/plain");
  });
  if (const auto& ui = service_.options().ui_dir) {
    server_->set_mount_point("/ui", ui->string());
  }
}

LabelServer::~LabelServer() { stop(); }

int LabelServer::bind(const std::string& host, int port) {
  if (port == 0) return server_->bind_to_any_port(host);
  if (!server_->bind_to_port(host, port)) {
    throw Error(ErrorCode::kIoError,
                "cannot bind " + host + ":" + std::to_string(port));
  }
  return port;
}

void LabelServer::listen() { server_->listen_after_bind(); }

void LabelServer::stop() {
  if (server_ && server_->is_running()) server_->stop();
}

}  // namespace tvdigest::service
