// Acceptance suite: one PASS/FAIL line per criterion, non-zero exit on any
// failure. Runs entirely on scripted and recombination providers.

#include <httplib.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>
#include <thread>

#include "test_support.hpp"
#include "tvdigest/evaluation/evaluation.hpp"
#include "tvdigest/fusion/fusion.hpp"
#include "tvdigest/service/document.hpp"
#include "tvdigest/service/server.hpp"

using namespace tvdigest;
namespace ts = tvdigest::testing;

namespace {

struct Outcome {
  bool ok = true;
  std::string detail;

  void require(bool cond, const std::string& what) {
    if (!cond && ok) {
      ok = false;
      detail = what;
    }
  }
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(double x) {
  std::ostringstream o;
  o.precision(10);
  o << x;
  return o.str();
}

Outcome entropy_oracle() {
  Outcome out;
  std::mt19937 rng(2024);
  auto t0 = Clock::now();
  for (int i = 0; i < 1000 && out.ok; ++i) {
    int distinct = std::uniform_int_distribution<int>(1, 10)(rng);
    int total = std::uniform_int_distribution<int>(1, 50)(rng);
    std::vector<std::string> tokens;
    for (int k = 0; k < total; ++k) {
      tokens.push_back("w" + std::to_string(rng() % distinct));
    }
    // One token per sentence keeps the library's tokenizer out of the way.
    auto r = fusion::shannon_entropy(tokens);
    double oracle = ts::entropy_oracle(tokens);
    std::set<std::string> seen(tokens.begin(), tokens.end());
    out.require(std::abs(r.bits - oracle) <= 1e-9,
                "multiset " + std::to_string(i) + ": " + fmt(r.bits) + " vs " + fmt(oracle));
    out.require((r.bits == 0.0) == (seen.size() == 1),
                "H=0 iff one distinct token violated at " + std::to_string(i));
    out.require(r.bits <= std::log2(static_cast<double>(seen.size())) + 1e-9,
                "H above log2(distinct) at " + std::to_string(i));
  }
  double secs = seconds_since(t0);
  out.require(secs < 5.0, "runtime " + fmt(secs) + " s");
  if (out.ok) out.detail = "1000 multisets in " + fmt(secs) + " s";
  return out;
}

Outcome likert_table() {
  Outcome out;
  const int expected[] = {1, 1, 2, 2, 3, 3, 4, 4, 5, 5, 5};
  for (int i = 0; i <= 10; ++i) {
    double d = i / 10.0;
    int got = evaluation::likert_map(d);
    out.require(got == expected[i],
                "likert(" + fmt(d) + ") = " + std::to_string(got));
  }
  return out;
}

Outcome algorithm_fidelity() {
  Outcome out;
  providers::RecombinationProvider llm;
  providers::HashedBagEmbedder emb(64);
  std::mt19937 rng(7);
  const std::vector<std::string> words = {"kernel", "overflow", "opcode", "parser",
                                          "socket", "driver", "cookie", "header"};
  auto phrase = [&] {
    std::string s;
    int n = 1 + static_cast<int>(rng() % 4);
    for (int i = 0; i < n; ++i) s += words[rng() % words.size()] + " ";
    return s;
  };
  for (int i = 0; i < 100 && out.ok; ++i) {
    std::vector<KeyAspect> vals;
    int n = 2 + static_cast<int>(rng() % 4);
    for (int k = 0; k < n; ++k) {
      vals.push_back({AspectType::kRootCause, text::normalize(phrase()),
                      RepositoryId::builtins()[static_cast<std::size_t>(k) % 4], {}});
    }
    double a = evaluation::aspect_dispersion(vals, llm, emb).dispersion;
    std::shuffle(vals.begin(), vals.end(), rng);
    double b = evaluation::aspect_dispersion(vals, llm, emb).dispersion;
    out.require(std::abs(a - b) <= 1e-12, "permutation changed dispersion");

    std::vector<KeyAspect> dup(static_cast<std::size_t>(n), vals.front());
    double d = evaluation::aspect_dispersion(dup, llm, emb).dispersion;
    out.require(std::abs(d) <= 1e-12, "duplicates gave " + fmt(d));
  }
  // Two single-token values in different buckets.
  std::string x, y;
  for (std::size_t i = 0; i < words.size() && x.empty(); ++i) {
    for (std::size_t j = i + 1; j < words.size(); ++j) {
      if (ts::fnv_oracle(words[i]) % 64 != ts::fnv_oracle(words[j]) % 64) {
        x = words[i];
        y = words[j];
        break;
      }
    }
  }
  auto pair = evaluation::aspect_dispersion(
      {{AspectType::kImpact, x, RepositoryId::cve(), {}},
       {AspectType::kImpact, y, RepositoryId::jvn(), {}}},
      llm, emb);
  out.require(std::abs(pair.mean_sim - 0.5) <= 1e-9,
              "disjoint pair mean_sim " + fmt(pair.mean_sim));
  if (out.ok) out.detail = "disjoint mean_sim " + fmt(pair.mean_sim);
  return out;
}

Outcome union_bound() {
  Outcome out;
  std::mt19937 rng(31);
  for (int c = 0; c < 100 && out.ok; ++c) {
    auto g = ts::random_corpus(rng, 50);
    for (AspectType t : kAllAspects) {
      double merged = stats::merged_missing_rate(g, t);
      double best = 1.0;
      for (const auto& r : RepositoryId::builtins()) {
        best = std::min(best, stats::missing_rate(g, r, t));
      }
      out.require(merged <= best, "corpus " + std::to_string(c) + " " +
                                      std::string(aspect_name(t)) + ": " +
                                      fmt(merged) + " > " + fmt(best));
    }
  }
  return out;
}

Outcome identity_merge() {
  Outcome out;
  ts::FailingProvider llm;
  const std::vector<std::string> texts = {
      "improper bounds checking in parse_header() (v2.1)",
      "KVM does not properly handle the 0f05 opcode",
      "Ünïcode name handling"};
  for (const auto& text : texts) {
    KeyAspect v{AspectType::kRootCause, text, RepositoryId::cnnvd(), {}};
    auto m = fusion::merge_aspect({v}, llm);
    out.require(m.text == text, "text changed: " + m.text);
    out.require(!m.fallback, "identity marked as fallback");
  }
  // Same text reported by several repositories is still one value.
  KeyAspect a{AspectType::kImpact, "cause a crash", RepositoryId::cve(), {}};
  KeyAspect b{AspectType::kImpact, "cause a crash", RepositoryId::ibm(), {}};
  auto m = fusion::merge_aspect({a, b}, llm);
  out.require(m.text == "cause a crash", "multi-source identity changed text");
  out.require(llm.call_count() == 0,
              "provider called " + std::to_string(llm.call_count()) + " times");
  return out;
}

Outcome groundedness() {
  Outcome out;
  std::mt19937 rng(99);
  service::Pipeline pipeline(extraction::default_templates(),
                             fusion::default_merge_examples(), ts::fixed_clock);
  providers::HashedBagEmbedder emb;
  providers::RecombinationProvider plain;

  struct Sample {
    std::string merged;
    std::vector<Tvd> sources;
  };
  std::vector<Sample> samples;
  std::vector<bool> all_flags;
  for (int c = 0; c < 100; ++c) {
    auto id = CveId::parse("CVE-2022-" + std::to_string(40000 + c));
    ts::ExtractionTable table;
    std::vector<Tvd> tvds;
    for (auto& rec : ts::synthetic_cve(id, rng)) {
      table.add(rec.tvd.text, rec.response);
      tvds.push_back(rec.tvd);
    }
    providers::RecombinationProvider llm(&table);
    DigestLabel l = pipeline.generate_label(id, tvds, {}, {llm, emb});
    for (const auto& [t, e] : l.merged) all_flags.push_back(e.grounded);
    // One merged output per CVE; RootCause when present.
    auto it = l.merged.find(AspectType::kRootCause);
    if (it == l.merged.end()) it = l.merged.begin();
    samples.push_back({it->second.text, tvds});
  }
  double clean = fusion::hallucination_rate(all_flags);
  out.require(clean == 0.0, "clean rate " + fmt(clean));

  std::vector<bool> flags;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    std::string text = samples[i].merged;
    if (i % 7 == 3 && i < 7 * 14) text += " zqxjvortex";
    flags.push_back(fusion::groundedness(text, samples[i].sources, plain).grounded);
  }
  double injected = fusion::hallucination_rate(flags);
  out.require(injected == 14.0, "injected rate " + fmt(injected));
  if (out.ok) {
    out.detail = std::to_string(all_flags.size()) + " merged entries clean; injected " +
                 fmt(injected) + "%";
  }
  return out;
}

DigestLabel fixture_label(std::function<Timestamp()> clock = ts::fixed_clock) {
  providers::ScriptedProvider llm(ts::load_fixture_script());
  providers::HashedBagEmbedder emb(64);
  service::Pipeline p(extraction::default_templates(), fusion::default_merge_examples(),
                      std::move(clock));
  return p.generate_label(CveId::parse("CVE-2012-0045"), ts::load_fixture_corpus(), {},
                          {llm, emb});
}

Outcome kvm_fixture() {
  Outcome out;
  auto t0 = Clock::now();
  DigestLabel l = fixture_label();
  auto rc = l.merged.find(AspectType::kRootCause);
  out.require(rc != l.merged.end(), "no merged RootCause");
  if (!out.ok) return out;
  auto tokens = text::tokenize(rc->second.text);
  for (const char* want : {"0f05", "cpu", "models", "modes"}) {
    out.require(std::find(tokens.begin(), tokens.end(), want) != tokens.end(),
                std::string("merged RootCause lacks '") + want + "'");
  }
  auto root_of = [&](const RepositoryId& r) {
    const auto& v = l.per_source.at(r).values(AspectType::kRootCause);
    return v.empty() ? std::string() : v.front().text;
  };
  out.require(root_of(RepositoryId::cve()).find("does not properly handle the 0f05 opcode") !=
                  std::string::npos,
              "CVE phrasing: " + root_of(RepositoryId::cve()));
  out.require(root_of(RepositoryId::cnnvd()) ==
                  "KVM improperly handles syscall instructions in specific CPU modes on "
                  "certain CPU models",
              "CNNVD phrasing: " + root_of(RepositoryId::cnnvd()));
  out.require(root_of(RepositoryId::ibm()) == "unable to handle opcode 0f05 correctly",
              "IBM phrasing: " + root_of(RepositoryId::ibm()));
  out.require(root_of(RepositoryId::jvn()) ==
                  "the improper handling of the syscall opcode 0f05 by KVM on specific "
                  "CPU models",
              "JVN phrasing: " + root_of(RepositoryId::jvn()));

  AspectSet all(l.cve_id);
  for (const auto& [_, s] : l.per_source) all.merge_from(s);
  int populated = 0;
  for (AspectType t : kAllAspects) populated += all.present(t) ? 1 : 0;
  out.require(l.evaluation.integrity_present == populated,
              "integrity " + std::to_string(l.evaluation.integrity_present) + " vs " +
                  std::to_string(populated));

  ts::TempDir dir;
  service::LabelStore store(dir.path());
  std::string bytes = store.store(l);
  out.require(store.load_bytes(l.cve_id) == bytes, "stored bytes differ");
  DigestLabel back = store.load(l.cve_id);
  out.require(back == l, "loaded label differs");
  out.require(service::label_bytes(back) == bytes, "re-serialized bytes differ");

  double secs = seconds_since(t0);
  out.require(secs < 1.0, "runtime " + fmt(secs) + " s");
  if (out.ok) out.detail = "\"" + rc->second.text + "\" in " + fmt(secs) + " s";
  return out;
}

Outcome service_contract() {
  Outcome out;
  ts::TempDir dir;
  service::LabelStore store(dir.path());
  providers::ScriptedProvider llm(ts::load_fixture_script());
  providers::HashedBagEmbedder emb(64);
  service::Pipeline pipeline(extraction::default_templates(),
                             fusion::default_merge_examples(), ts::fixed_clock);
  service::LabelService svc(pipeline, {llm, emb}, store, ts::load_fixture_corpus());
  service::LabelServer server(svc);
  int port = server.bind("127.0.0.1", 0);
  std::thread th([&] { server.listen(); });
  httplib::Client client("127.0.0.1", port);
  for (int i = 0; i < 200; ++i) {
    if (auto r = client.Get("/healthz"); r && r->status == 200) break;
    std::this_thread::sleep_for(std::chrono::milliseconds(10));
  }

  auto post = client.Post("/api/v1/labels", R"({"cve_id":"CVE-2012-0045"})",
                          "application/json");
  out.require(post && post->status == 201, "POST failed");
  auto get = client.Get("/api/v1/labels/CVE-2012-0045");
  out.require(get && get->status == 200, "GET failed");
  if (out.ok) {
    out.require(get->body == post->body, "GET body differs from POST body");
    auto full = nlohmann::json::parse(get->body);
    out.require(full.dump() == get->body, "body is not canonical JSON");
    std::size_t total = 0;
    for (const auto& [_, aspects] : full["per_source"].items()) {
      for (const auto& [__, vals] : aspects.items()) total += vals.size();
    }
    for (const char* src : {"CVE", "IBM", "CNNVD", "JVN"}) {
      auto r = client.Get(std::string("/api/v1/labels/CVE-2012-0045?source=") + src);
      out.require(r && r->status == 200, std::string("projection failed for ") + src);
      if (!out.ok) break;
      auto proj = nlohmann::json::parse(r->body);
      std::size_t count = 0;
      for (const auto& [name, vals] : proj["aspects"].items()) {
        for (const auto& v : vals) {
          ++count;
          const auto& pool = full["per_source"][src][name];
          out.require(std::find(pool.begin(), pool.end(), v) != pool.end(),
                      std::string("projected value not in per_source for ") + src);
        }
      }
      out.require(count < total, std::string("projection not strict for ") + src);
      out.require(!proj.contains("per_source") && !proj.contains("merged"),
                  "projection leaks other sources");
    }
  }
  auto bad = client.Get("/api/v1/labels/CVE-12-0045");
  out.require(bad && bad->status == 422, "malformed id not 422");
  auto bad_post = client.Post("/api/v1/labels", R"({"cve_id":"CVE-0045"})",
                              "application/json");
  out.require(bad_post && bad_post->status == 422, "malformed POST not 422");
  auto missing = client.Get("/api/v1/labels/CVE-2019-9999");
  out.require(missing && missing->status == 404, "unknown id not 404");

  server.stop();
  th.join();
  return out;
}

Outcome determinism() {
  Outcome out;
  DigestLabel a = fixture_label(Timestamp::now);
  std::this_thread::sleep_for(std::chrono::milliseconds(1100));
  DigestLabel b = fixture_label(Timestamp::now);
  out.require(a.generated_at != b.generated_at, "clock did not advance");
  b.generated_at = a.generated_at;
  out.require(a == b, "labels differ");
  out.require(service::label_bytes(a) == service::label_bytes(b), "bytes differ");
  return out;
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"entropy oracle equivalence", entropy_oracle},
      {"likert binning table", likert_table},
      {"dispersion algorithm fidelity", algorithm_fidelity},
      {"union-bound property", union_bound},
      {"identity merge", identity_merge},
      {"groundedness / hallucination rate", groundedness},
      {"CVE-2012-0045 end-to-end fixture", kvm_fixture},
      {"service contract", service_contract},
      {"determinism", determinism},
  };
  int failures = 0;
  for (const auto& [name, run] : criteria) {
    Outcome o;
    try {
      o = run();
    } catch (const std::exception& e) {
      o.ok = false;
      o.detail = std::string("exception: ") + e.what();
    }
    if (!o.ok) ++failures;
    std::printf("%s  %s%s%s\n", o.ok ? "PASS" : "FAIL", name.c_str(),
                o.detail.empty() ? "" : "  -- ", o.detail.c_str());
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failures,
              criteria.size());
  return failures == 0 ? 0 : 1;
}
