#include <gtest/gtest.h>
#include <httplib.h>

#include <atomic>
#include <fstream>
#include <thread>

#include "test_support.hpp"
#include "tvdigest/providers/http.hpp"
#include "tvdigest/service/server.hpp"

namespace tvdigest {
namespace {

using nlohmann::json;

/// httplib server on an ephemeral loopback port, run on a background thread.
class LocalServer {
 public:
  httplib::Server& server() { return server_; }

  void start() {
    port_ = server_.bind_to_any_port("127.0.0.1");
    ASSERT_GT(port_, 0);
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }
  ~LocalServer() {
    server_.stop();
    if (thread_.joinable()) thread_.join();
  }
  std::string url(const std::string& path) const {
    return "http://127.0.0.1:" + std::to_string(port_) + path;
  }
  int port() const { return port_; }

 private:
  httplib::Server server_;
  std::thread thread_;
  int port_ = 0;
};

providers::HttpProviderOptions options(const LocalServer& s, const std::string& path) {
  providers::HttpProviderOptions o;
  o.endpoint = s.url(path);
  o.model = "test-model";
  o.timeout = std::chrono::seconds(5);
  return o;
}

TEST(HttpEndpointTest, Parse) {
  auto e = providers::HttpEndpoint::parse("https://api.example.com:8443/v1/chat");
  EXPECT_EQ(e.scheme_host_port, "https://api.example.com:8443");
  EXPECT_EQ(e.path, "/v1/chat");
  EXPECT_EQ(providers::HttpEndpoint::parse("http://localhost").path, "/");
  EXPECT_THROW(providers::HttpEndpoint::parse("ftp://x/y"), Error);
  EXPECT_THROW(providers::HttpEndpoint::parse("localhost:80/x"), Error);
}

TEST(HttpCompletionTest, SendsChatRequestAndReadsContent) {
  LocalServer s;
  json seen;
  std::string auth;
  s.server().Post("/v1/chat", [&](const httplib::Request& req, httplib::Response& res) {
    seen = json::parse(req.body);
    auth = req.get_header_value("Authorization");
    res.set_content(R"({"choices":[{"message":{"content":"kvm, opcode"},"finish_reason":"stop"}]})",
                    "application/json");
  });
  s.start();
  auto o = options(s, "/v1/chat");
  o.api_key = "sk-test";
  providers::HttpCompletionProvider llm(o);
  EXPECT_EQ(llm.complete({"prompt text", 128, 0.0, "anchor"}), "kvm, opcode");
  EXPECT_EQ(seen["model"], "test-model");
  EXPECT_EQ(seen["messages"][0]["content"], "prompt text");
  EXPECT_EQ(seen["max_tokens"], 128);
  EXPECT_EQ(auth, "Bearer sk-test");
}

TEST(HttpCompletionTest, RetriesRateLimitAndServerErrors) {
  LocalServer s;
  std::atomic<int> calls{0};
  s.server().Post("/c", [&](const httplib::Request&, httplib::Response& res) {
    int n = ++calls;
    if (n == 1) {
      res.status = 429;
    } else if (n == 2) {
      res.status = 503;
    } else {
      res.set_content(R"({"choices":[{"text":"done"}]})", "application/json");
    }
  });
  s.start();
  providers::HttpCompletionProvider llm(options(s, "/c"));
  EXPECT_EQ(llm.complete({"p", 16, 0.0, "merge"}), "done");
  EXPECT_EQ(calls.load(), 3);
}

TEST(HttpCompletionTest, GivesUpAfterAttemptsAndOnClientErrors) {
  LocalServer s;
  std::atomic<int> calls{0};
  s.server().Post("/busy", [&](const httplib::Request&, httplib::Response& res) {
    ++calls;
    res.status = 500;
  });
  s.server().Post("/bad", [&](const httplib::Request&, httplib::Response& res) {
    ++calls;
    res.status = 400;
  });
  s.start();
  providers::HttpCompletionProvider busy(options(s, "/busy"));
  try {
    busy.complete({"p", 16, 0.0, "extract"});
    FAIL();
  } catch (const ProviderError& e) {
    EXPECT_EQ(e.code(), ErrorCode::kProviderUnavailable);
    EXPECT_EQ(e.stage(), "extract");
  }
  EXPECT_EQ(calls.load(), 3);
  calls = 0;
  providers::HttpCompletionProvider bad(options(s, "/bad"));
  EXPECT_THROW(bad.complete({"p", 16, 0.0, "extract"}), ProviderError);
  EXPECT_EQ(calls.load(), 1);
}

TEST(HttpCompletionTest, TruncatedCompletionIsTooLong) {
  LocalServer s;
  s.server().Post("/c", [&](const httplib::Request&, httplib::Response& res) {
    res.set_content(R"({"choices":[{"message":{"content":"partial"},"finish_reason":"length"}]})",
                    "application/json");
  });
  s.server().Post("/empty", [&](const httplib::Request&, httplib::Response& res) {
    res.set_content(R"({"choices":[]})", "application/json");
  });
  s.start();
  providers::HttpCompletionProvider llm(options(s, "/c"));
  try {
    llm.complete({"p", 16, 0.0, "merge"});
    FAIL();
  } catch (const ProviderError& e) {
    EXPECT_EQ(e.code(), ErrorCode::kResponseTooLong);
  }
  providers::HttpCompletionProvider empty(options(s, "/empty"));
  EXPECT_THROW(empty.complete({"p", 16, 0.0, "merge"}), ProviderError);
}

TEST(HttpCompletionTest, UnreachableEndpoint) {
  providers::HttpProviderOptions o;
  o.endpoint = "http://127.0.0.1:1/none";
  o.timeout = std::chrono::seconds(1);
  providers::HttpCompletionProvider llm(o);
  EXPECT_THROW(llm.complete({"p", 16, 0.0, "anchor"}), ProviderError);
}

TEST(HttpEmbedderTest, ReadsEmbeddingAndChecksDimension) {
  LocalServer s;
  s.server().Post("/e", [&](const httplib::Request& req, httplib::Response& res) {
    auto body = json::parse(req.body);
    if (body["input"] == "wrong") {
      res.set_content(R"({"data":[{"embedding":[1,2]}]})", "application/json");
    } else {
      res.set_content(R"({"data":[{"embedding":[3,0,4]}]})", "application/json");
    }
  });
  s.start();
  providers::HttpEmbedder emb(options(s, "/e"), 3);
  auto v = emb.embed("kvm opcode");
  ASSERT_EQ(v.dimension(), 3u);
  EXPECT_DOUBLE_EQ(v.values()[2], 4.0);
  EXPECT_THROW(emb.embed("wrong"), ProviderError);
  EXPECT_THROW(emb.embed(""), ProviderError);
}

TEST(HttpGetterTest, FetchesTvdFromLocalRepository) {
  LocalServer s;
  std::string auth;
  s.server().Get(R"(/cve/(CVE-[0-9-]+))", [&](const httplib::Request& req, httplib::Response& res) {
    auth = req.get_header_value("X-Api-Key");
    if (req.matches[1] == "CVE-2012-0045") {
      res.set_content(R"({"desc":{"en":"KVM does not properly handle the 0f05 opcode."},"score":4.7})",
                      "application/json");
    } else {
      res.status = 404;
    }
  });
  s.start();
  ingestion::RepoClientConfig cfg;
  cfg.repo = RepositoryId::ibm();
  cfg.base_url = s.url("/cve/{cve_id}");
  cfg.response_path = "desc.en";
  cfg.cvss_path = "score";
  cfg.auth_header = "X-Api-Key: secret";
  auto http = ingestion::make_http_getter(std::chrono::seconds(5));
  Tvd t = ingestion::fetch_tvd(testing::cve("CVE-2012-0045"), cfg, *http, nullptr,
                               testing::fixed_clock);
  EXPECT_EQ(t.text, "KVM does not properly handle the 0f05 opcode.");
  EXPECT_EQ(t.repo, RepositoryId::ibm());
  EXPECT_EQ(t.cvss, 4.7);
  EXPECT_EQ(auth, "secret");
  Tvd none = ingestion::fetch_tvd(testing::cve("CVE-2012-0046"), cfg, *http, nullptr,
                                  testing::fixed_clock);
  EXPECT_TRUE(none.text.empty());
}

class LabelServerTest : public ::testing::Test {
 protected:
  void SetUp() override {
    ui_dir_ = dir_.path() / "ui";
    std::filesystem::create_directories(ui_dir_);
    std::ofstream(ui_dir_ / "index.html") << "<html>labels</html>";
    service::ServiceOptions opts;
    opts.ui_dir = ui_dir_;
    service_ = std::make_unique<service::LabelService>(
        pipeline_, service::Providers{llm_, embedder_}, store_,
        testing::load_fixture_corpus(), opts);
    server_ = std::make_unique<service::LabelServer>(*service_);
    port_ = server_->bind("127.0.0.1", 0);
    ASSERT_GT(port_, 0);
    thread_ = std::thread([this] { server_->listen(); });
    client_ = std::make_unique<httplib::Client>("127.0.0.1", port_);
    // Wait for the listener.
    for (int i = 0; i < 200; ++i) {
      if (auto r = client_->Get("/healthz"); r && r->status == 200) break;
      std::this_thread::sleep_for(std::chrono::milliseconds(10));
    }
  }
  void TearDown() override {
    server_->stop();
    if (thread_.joinable()) thread_.join();
  }

  testing::TempDir dir_;
  std::filesystem::path ui_dir_;
  service::LabelStore store_{dir_.path() / "labels"};
  providers::ScriptedProvider llm_{testing::load_fixture_script()};
  providers::HashedBagEmbedder embedder_{64};
  service::Pipeline pipeline_{extraction::default_templates(),
                              fusion::default_merge_examples(), testing::fixed_clock};
  std::unique_ptr<service::LabelService> service_;
  std::unique_ptr<service::LabelServer> server_;
  std::unique_ptr<httplib::Client> client_;
  std::thread thread_;
  int port_ = 0;
};

TEST_F(LabelServerTest, HealthAndUiMount) {
  auto h = client_->Get("/healthz");
  ASSERT_TRUE(h);
  EXPECT_EQ(h->body, "ok");
  auto ui = client_->Get("/ui/index.html");
  ASSERT_TRUE(ui);
  EXPECT_EQ(ui->status, 200);
  EXPECT_EQ(ui->body, "<html>labels</html>");
}

TEST_F(LabelServerTest, PostGetAndProjection) {
  auto post = client_->Post("/api/v1/labels", R"({"cve_id":"CVE-2012-0045"})",
                            "application/json");
  ASSERT_TRUE(post);
  ASSERT_EQ(post->status, 201) << post->body;
  auto get = client_->Get("/api/v1/labels/CVE-2012-0045");
  ASSERT_TRUE(get);
  EXPECT_EQ(get->status, 200);
  EXPECT_EQ(get->body, post->body);
  EXPECT_EQ(get->get_header_value("Content-Type"), "application/json");

  auto cnnvd = client_->Get("/api/v1/labels/CVE-2012-0045?source=CNNVD");
  ASSERT_TRUE(cnnvd);
  EXPECT_EQ(cnnvd->status, 200);
  auto full = json::parse(get->body);
  auto proj = json::parse(cnnvd->body);
  EXPECT_EQ(proj["aspects"], full["per_source"]["CNNVD"]);

  auto stats = client_->Get("/api/v1/corpus/stats");
  ASSERT_TRUE(stats);
  EXPECT_EQ(json::parse(stats->body)["cve_count"], 1);
}

TEST_F(LabelServerTest, ErrorStatuses) {
  auto bad = client_->Get("/api/v1/labels/CVE-20X2-0045");
  ASSERT_TRUE(bad);
  EXPECT_EQ(bad->status, 422);
  auto missing = client_->Get("/api/v1/labels/CVE-2019-0001");
  ASSERT_TRUE(missing);
  EXPECT_EQ(missing->status, 404);
  auto post = client_->Post("/api/v1/labels", R"({"cve_id":"bogus"})", "application/json");
  ASSERT_TRUE(post);
  EXPECT_EQ(post->status, 422);
  EXPECT_EQ(json::parse(post->body)["error"], "malformed_cve_id");
}

}  // namespace
}  // namespace tvdigest
