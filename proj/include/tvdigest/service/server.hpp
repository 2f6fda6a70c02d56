#pragma once

#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "tvdigest/ingestion/ingestion.hpp"
#include "tvdigest/service/pipeline.hpp"
#include "tvdigest/service/store.hpp"

namespace httplib {
class Server;
}

namespace tvdigest::service {

struct ServiceOptions {
  PipelineConfig pipeline;
  std::vector<ingestion::RepoClientConfig> repositories;
  std::optional<std::filesystem::path> ui_dir;
};

struct HttpResponse {
  int status = 200;
  std::string body;
  std::string content_type = "application/json";
};

/// Request handling, independent of the transport. Generation for one CVE
/// is serialized; distinct CVEs run concurrently.
class LabelService {
 public:
  LabelService(const Pipeline& pipeline, Providers providers,
               LabelStore& store, std::vector<Tvd> corpus,
               ServiceOptions opts = {},
               ingestion::HttpGetter* fetcher = nullptr);

  HttpResponse post_label(const std::string& body);
  HttpResponse get_label(const std::string& cve_id,
                         const std::optional<std::string>& source);
  HttpResponse corpus_stats();

  const ServiceOptions& options() const noexcept { return opts_; }

 private:
  std::vector<Tvd> sources_for(const CveId& cve);

  const Pipeline& pipeline_;
  Providers providers_;
  LabelStore& store_;
  std::map<CveId, std::vector<Tvd>> corpus_;
  ServiceOptions opts_;
  ingestion::HttpGetter* fetcher_;
  KeyedMutex generation_locks_;
  std::mutex corpus_mu_;
};

/// cpp-httplib transport for LabelService.
class LabelServer {
 public:
  explicit LabelServer(LabelService& service);
  ~LabelServer();

  /// Binds to an ephemeral port when port == 0; returns the bound port.
  int bind(const std::string& host, int port);
  /// Blocks until stop().
  void listen();
  void stop();

 private:
  LabelService& service_;
  std::unique_ptr<httplib::Server> server_;
};

}  // namespace tvdigest::service
