// tvdigest: ingest TVD corpora, generate digest labels, report corpus
// statistics and serve labels over HTTP.

#include <CLI11.hpp>

#include <csignal>
#include <fstream>
#include <iostream>
#include <sstream>

#include "tvdigest/core/json.hpp"
#include "tvdigest/core/text.hpp"
#include "tvdigest/ingestion/ingestion.hpp"
#include "tvdigest/service/app_config.hpp"
#include "tvdigest/service/document.hpp"
#include "tvdigest/service/server.hpp"
#include "tvdigest/stats/corpus_stats.hpp"

namespace {

using namespace tvdigest;

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitProvider = 3;

service::LabelServer* g_server = nullptr;

void handle_signal(int) {
  if (g_server != nullptr) g_server->stop();
}

service::AppConfig load_config(const std::string& path) {
  if (path.empty()) return {};
  return service::AppConfig::load(path);
}

void write_output(const std::string& path, const std::string& content) {
  if (path.empty() || path == "-") {
    std::cout << content;
    return;
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIoError, "cannot write " + path);
  out << content;
}

std::vector<CveId> parse_cve_list(const std::string& csv) {
  std::vector<CveId> out;
  std::stringstream in(csv);
  std::string item;
  while (std::getline(in, item, ',')) {
    if (!text::trim(item).empty()) out.push_back(CveId::parse(item));
  }
  return out;
}

std::vector<Tvd> fetch_all(const std::vector<CveId>& cves,
                           const service::AppConfig& cfg) {
  if (cfg.repositories.empty()) {
    throw Error(ErrorCode::kConfigError,
                "--fetch needs \"repositories\" in the config file");
  }
  auto http = ingestion::make_http_getter();
  std::vector<std::unique_ptr<ingestion::RateLimiter>> limiters;
  for (const auto& r : cfg.repositories) {
    limiters.push_back(std::make_unique<ingestion::RateLimiter>(r.rate_limit));
  }
  std::vector<Tvd> out;
  for (const auto& cve : cves) {
    for (std::size_t i = 0; i < cfg.repositories.size(); ++i) {
      out.push_back(ingestion::fetch_tvd(cve, cfg.repositories[i], *http,
                                         limiters[i].get()));
    }
  }
  return out;
}

struct IngestArgs {
  std::string input;
  std::string fetch;
  std::string config;
  std::string output;
};

int run_ingest(const IngestArgs& a) {
  std::vector<Tvd> tvds;
  if (!a.input.empty()) {
    tvds = ingestion::load_corpus(a.input);
  } else {
    tvds = fetch_all(parse_cve_list(a.fetch), load_config(a.config));
  }
  auto groups = ingestion::group_by_cve(tvds);
  std::vector<Tvd> ordered;
  for (auto& [_, list] : groups) {
    for (auto& t : list) ordered.push_back(std::move(t));
  }
  write_output(a.output, ingestion::serialize_corpus(ordered));
  std::cerr << ordered.size() << " TVDs across " << groups.size()
            << " CVE-IDs\n";
  return kExitOk;
}

struct LabelArgs {
  std::string cve;
  std::string corpus;
  std::string config;
  std::string mode;
  bool no_entropy = false;
  std::string store;
  std::string output;
};

int run_label(const LabelArgs& a) {
  CveId cve = CveId::parse(a.cve);
  service::AppConfig cfg = load_config(a.config);
  service::PipelineConfig pipeline_cfg = cfg.pipeline;
  if (!a.mode.empty()) pipeline_cfg.mode = parse_mode(a.mode);
  if (a.no_entropy) pipeline_cfg.entropy_constraint = false;

  std::vector<Tvd> tvds;
  if (!a.corpus.empty()) {
    auto groups = ingestion::group_by_cve(ingestion::load_corpus(a.corpus));
    if (auto it = groups.find(cve); it != groups.end()) tvds = it->second;
  } else {
    tvds = fetch_all({cve}, cfg);
  }
  auto bundle = providers::make_providers(cfg.provider);
  service::Pipeline pipeline(cfg.templates, cfg.merge_examples);
  DigestLabel label = pipeline.generate_label(
      cve, tvds, pipeline_cfg, {*bundle.llm, *bundle.embedder});
  std::string bytes;
  if (!a.store.empty()) {
    service::LabelStore store(a.store);
    bytes = store.store(label);
  } else {
    bytes = service::label_bytes(label);
  }
  write_output(a.output, bytes + "\n");
  return kExitOk;
}

struct StatsArgs {
  std::string corpus;
  std::string config;
  bool exact = false;
  double tau = stats::kDefaultInconsistencyThreshold;
  std::string format = "json";
  std::string output;
};

int run_stats(const StatsArgs& a) {
  service::AppConfig cfg = load_config(a.config);
  auto tvds = ingestion::load_corpus(a.corpus);
  auto bundle = providers::make_providers(cfg.provider);
  stats::CorpusAspects groups;
  std::set<RepositoryId> repos;
  for (const auto& tvd : tvds) {
    repos.insert(tvd.repo);
    auto ex = extraction::extract_aspects(tvd, cfg.pipeline.mode, *bundle.llm,
                                          cfg.templates);
    auto& per_repo = groups[tvd.cve_id];
    auto [it, _] = per_repo.try_emplace(tvd.repo, tvd.cve_id);
    it->second.merge_from(ex.aspects);
  }
  stats::DispersionFn fn =
      a.exact ? stats::exact_distinctness()
              : stats::provider_dispersion(*bundle.llm, *bundle.embedder);
  auto metrics = stats::compute_metrics(groups, a.tau, fn, repos);
  if (a.format == "csv") {
    write_output(a.output, stats::to_csv(metrics));
  } else {
    write_output(a.output, canonical_dump(stats::to_json(metrics)) + "\n");
  }
  return kExitOk;
}

struct ServeArgs {
  std::string host = "127.0.0.1";
  int port = 8080;
  std::string store;
  std::string config;
  std::string corpus;
  std::string ui;
};

int run_serve(const ServeArgs& a) {
  service::AppConfig cfg = load_config(a.config);
  auto bundle = providers::make_providers(cfg.provider);
  service::Pipeline pipeline(cfg.templates, cfg.merge_examples);
  service::LabelStore store(a.store);
  std::vector<Tvd> corpus;
  if (!a.corpus.empty()) corpus = ingestion::load_corpus(a.corpus);
  auto http = ingestion::make_http_getter();
  service::ServiceOptions opts{cfg.pipeline, cfg.repositories, std::nullopt};
  if (!a.ui.empty()) opts.ui_dir = a.ui;
  service::LabelService svc(pipeline, {*bundle.llm, *bundle.embedder}, store,
                            std::move(corpus), opts, http.get());
  service::LabelServer server(svc);
  int port = server.bind(a.host, a.port);
  std::cerr << "listening on http://" << a.host << ":" << port << "\n";
  g_server = &server;
  std::signal(SIGINT, handle_signal);
  std::signal(SIGTERM, handle_signal);
  server.listen();
  g_server = nullptr;
  return kExitOk;
}

int run_validate(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIoError, "cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  std::string bytes = buf.str();
  while (!bytes.empty() && (bytes.back() == '\n' || bytes.back() == '\r')) {
    bytes.pop_back();
  }
  DigestLabel label = service::parse_label_document(bytes);
  std::cout << label.cve_id.str() << ": valid\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Digest labels for textual vulnerability descriptions"};
  app.require_subcommand(1);

  IngestArgs ingest;
  auto* ingest_cmd = app.add_subcommand("ingest", "Validate or fetch a TVD corpus");
  auto* input_opt = ingest_cmd->add_option("--input", ingest.input, "JSONL corpus")
                        ->check(CLI::ExistingFile);
  auto* fetch_opt = ingest_cmd->add_option("--fetch", ingest.fetch,
                                           "Comma-separated CVE-IDs to fetch");
  input_opt->excludes(fetch_opt);
  ingest_cmd->add_option("--config", ingest.config, "Config file");
  ingest_cmd->add_option("--output,-o", ingest.output, "Output JSONL (default stdout)");

  LabelArgs label;
  auto* label_cmd = app.add_subcommand("label", "Generate one digest label");
  label_cmd->add_option("--cve", label.cve, "CVE-ID")->required();
  label_cmd->add_option("--corpus", label.corpus, "JSONL corpus");
  label_cmd->add_option("--config", label.config, "Config file");
  label_cmd->add_option("--mode", label.mode, "constrained | vanilla | cot")
      ->check(CLI::IsMember({"constrained", "vanilla", "cot"}));
  label_cmd->add_flag("--no-entropy", label.no_entropy,
                      "Omit the entropy constraint from merge prompts");
  label_cmd->add_option("--store", label.store, "Also persist into this store");
  label_cmd->add_option("--output,-o", label.output, "Output file (default stdout)");

  StatsArgs st;
  auto* stats_cmd = app.add_subcommand("stats", "Corpus missing/inconsistency metrics");
  stats_cmd->add_option("--corpus", st.corpus, "JSONL corpus")
      ->required()
      ->check(CLI::ExistingFile);
  stats_cmd->add_option("--config", st.config, "Config file");
  stats_cmd->add_flag("--exact", st.exact,
                      "Exact-string inconsistency instead of dispersion");
  stats_cmd->add_option("--tau", st.tau, "Dispersion threshold")
      ->check(CLI::Range(0.0, 1.0));
  stats_cmd->add_option("--format", st.format, "json | csv")
      ->check(CLI::IsMember({"json", "csv"}));
  stats_cmd->add_option("--output,-o", st.output, "Output file (default stdout)");

  ServeArgs serve;
  auto* serve_cmd = app.add_subcommand("serve", "Serve the label HTTP API");
  serve_cmd->add_option("--host", serve.host, "Bind address");
  serve_cmd->add_option("--port", serve.port, "Port")->check(CLI::Range(0, 65535));
  serve_cmd->add_option("--store", serve.store, "Label store directory")->required();
  serve_cmd->add_option("--config", serve.config, "Config file");
  serve_cmd->add_option("--corpus", serve.corpus, "JSONL corpus to serve from");
  serve_cmd->add_option("--ui", serve.ui, "Static viewer assets served under /ui/");

  std::string validate_path;
  auto* validate_cmd = app.add_subcommand("validate", "Check a label document");
  validate_cmd->add_option("label", validate_path, "Label JSON file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return e.get_exit_code() == 0 ? kExitOk : kExitUsage;
  }
  if (*ingest_cmd && ingest.input.empty() && ingest.fetch.empty()) {
    std::cerr << "ingest: one of --input or --fetch is required\n";
    return kExitUsage;
  }

  try {
    if (*ingest_cmd) return run_ingest(ingest);
    if (*label_cmd) return run_label(label);
    if (*stats_cmd) return run_stats(st);
    if (*serve_cmd) return run_serve(serve);
    if (*validate_cmd) return run_validate(validate_path);
  } catch (const ProviderError& e) {
    std::cerr << "provider error";
    if (!e.stage().empty()) std::cerr << " in " << e.stage();
    std::cerr << ": " << e.what() << "\n";
    return kExitProvider;
  } catch (const Error& e) {
    std::cerr << error_code_name(e.code()) << ": " << e.what() << "\n";
    return is_provider_error(e.code()) ? kExitProvider : kExitData;
  }
  return kExitUsage;
}
