#pragma once

// Shared fixtures and independent oracles for the test binaries.

#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "tvdigest/core/model.hpp"
#include "tvdigest/ingestion/ingestion.hpp"
#include "tvdigest/providers/mock.hpp"
#include "tvdigest/stats/corpus_stats.hpp"

namespace tvdigest::testing {

inline std::filesystem::path data_dir() { return TVDIGEST_DATA_DIR; }

inline Timestamp fixed_time() {
  return Timestamp::parse("2024-06-01T12:00:00Z");
}

inline Timestamp fixed_clock() { return fixed_time(); }

inline CveId cve(const std::string& s) { return CveId::parse(s); }
inline RepositoryId repo(const std::string& s) { return RepositoryId::parse(s); }

inline Tvd make_tvd(const std::string& id, const std::string& r,
                    const std::string& text) {
  return Tvd{cve(id), repo(r), text, "en", fixed_time(), std::nullopt};
}

/// Scratch directory removed on destruction.
class TempDir {
 public:
  TempDir() {
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() /
            ("tvdigest-test-" + std::to_string(rd()) + std::to_string(rd()));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

inline std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

// ---- oracles -------------------------------------------------------------

/// Count-and-sum entropy over pre-split tokens, natural log converted to
/// bits at the end so the arithmetic path differs from the library's.
inline double entropy_oracle(const std::vector<std::string>& tokens) {
  std::map<std::string, int> counts;
  for (const auto& t : tokens) ++counts[t];
  double n = static_cast<double>(tokens.size());
  double h = 0.0;
  for (const auto& [_, c] : counts) {
    double p = c / n;
    h -= p * std::log(p);
  }
  return h / std::log(2.0);
}

/// Textbook FNV-1a 64.
inline std::uint64_t fnv_oracle(const std::string& s) {
  std::uint64_t h = 14695981039346656037ULL;
  for (char ch : s) {
    h ^= static_cast<std::uint8_t>(ch);
    h *= 1099511628211ULL;
  }
  return h;
}

inline double cosine_oracle(const std::vector<double>& a,
                            const std::vector<double>& b) {
  double dot = 0, na = 0, nb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    dot += a[i] * b[i];
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  if (na == 0 || nb == 0) return 0.0;
  return dot / std::sqrt(na * nb);
}

/// Table lookup rather than arithmetic binning.
inline int likert_oracle(double d) {
  static const double kEdges[] = {0.2, 0.4, 0.6, 0.8};
  int level = 1;
  for (double e : kEdges) {
    if (d >= e - 1e-12) ++level;
  }
  return level;
}

// ---- providers -------------------------------------------------------------

/// Answers extraction prompts from a table keyed by TVD text; everything
/// else is unanswerable.
class ExtractionTable final : public providers::CompletionProvider {
 public:
  void add(const std::string& tvd_text, const std::string& response) {
    table_[tvd_text] = response;
  }

 protected:
  std::string do_complete(const providers::CompletionRequest& req) override {
    auto begin = req.prompt.find("TVD:\n");
    if (begin != std::string::npos) {
      begin += 5;
      auto end = req.prompt.find("\n\n", begin);
      auto it = table_.find(req.prompt.substr(begin, end - begin));
      if (it != table_.end()) return it->second;
    }
    throw ProviderError(ErrorCode::kScriptExhausted, "no extraction entry",
                        req.tag);
  }

 private:
  std::map<std::string, std::string> table_;
};

/// Returns the same text for every request.
class ConstantProvider final : public providers::CompletionProvider {
 public:
  explicit ConstantProvider(std::string reply) : reply_(std::move(reply)) {}

 protected:
  std::string do_complete(const providers::CompletionRequest&) override {
    return reply_;
  }

 private:
  std::string reply_;
};

/// Always throws the given provider error.
class FailingProvider final : public providers::CompletionProvider {
 public:
  explicit FailingProvider(ErrorCode code = ErrorCode::kProviderUnavailable)
      : code_(code) {}

 protected:
  std::string do_complete(const providers::CompletionRequest& req) override {
    throw ProviderError(code_, "injected failure", req.tag);
  }

 private:
  ErrorCode code_;
};

inline providers::ProviderScript load_fixture_script() {
  return providers::ProviderScript::load(data_dir() /
                                         "CVE-2012-0045.script.json");
}

inline std::vector<Tvd> load_fixture_corpus() {
  return ingestion::load_corpus(data_dir() / "CVE-2012-0045.jsonl");
}

// ---- synthetic corpora -----------------------------------------------------

/// Vocabulary for synthetic aspect values. Every word is distinct so any
/// fabricated word is detectable.
struct SyntheticVocabulary {
  std::vector<std::string> vuln = {"buffer overflow", "sql injection",
                                   "use-after-free", "integer overflow",
                                   "path traversal"};
  std::vector<std::string> vector = {"via crafted packets",
                                     "via a malicious document",
                                     "through the admin console",
                                     "by sending long headers"};
  std::vector<std::string> attacker = {"remote attackers", "local users",
                                       "authenticated users"};
  std::vector<std::string> root = {"improper bounds checking",
                                   "missing input sanitization",
                                   "stale pointer reuse",
                                   "unchecked length arithmetic"};
  std::vector<std::string> impact = {"execute arbitrary code",
                                     "obtain sensitive information",
                                     "cause memory corruption",
                                     "gain elevated privileges"};
};

struct SyntheticRecord {
  Tvd tvd;
  std::string response;  // extraction reply for this TVD
};

/// One CVE described by up to four repositories. Each repository keeps
/// each aspect with probability `keep`. The TVD text contains every kept
/// value verbatim.
inline std::vector<SyntheticRecord> synthetic_cve(const CveId& id,
                                                  std::mt19937& rng,
                                                  double keep = 0.75) {
  static const SyntheticVocabulary vocab;
  static const std::array<RepositoryId, 4> repos = RepositoryId::builtins();
  std::bernoulli_distribution coin(keep);
  auto pick = [&](const std::vector<std::string>& pool) {
    return pool[std::uniform_int_distribution<std::size_t>(0, pool.size() - 1)(rng)];
  };
  std::vector<SyntheticRecord> out;
  for (const auto& r : repos) {
    std::array<std::string, 5> values;
    const std::vector<std::string>* pools[] = {&vocab.vuln, &vocab.vector,
                                               &vocab.attacker, &vocab.root,
                                               &vocab.impact};
    bool any = false;
    for (std::size_t i = 0; i < 5; ++i) {
      if (coin(rng)) {
        values[i] = pick(*pools[i]);
        any = true;
      }
    }
    if (!any) values[3] = pick(vocab.root);
    std::string text = "Report " + id.str() + ".";
    std::string response;
    for (std::size_t i = 0; i < 5; ++i) {
      if (!values[i].empty()) text += " " + values[i] + ";";
      response += std::string(aspect_name(kAllAspects[i])) + ": " +
                  (values[i].empty() ? "NONE" : values[i]) + "\n";
    }
    response += "Product: Widget Server\nComponent: NONE\nVersion: NONE\n";
    out.push_back({Tvd{id, r, text, "en", fixed_time(), std::nullopt}, response});
  }
  return out;
}

/// Random corpus of per-repository aspect sets for the statistics module.
inline stats::CorpusAspects random_corpus(std::mt19937& rng,
                                          std::size_t n_cves = 50) {
  static const SyntheticVocabulary vocab;
  const std::vector<std::string>* pools[] = {&vocab.vuln, &vocab.vector,
                                             &vocab.attacker, &vocab.root,
                                             &vocab.impact};
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  stats::CorpusAspects out;
  for (std::size_t c = 0; c < n_cves; ++c) {
    CveId id = CveId::parse("CVE-2020-" + std::to_string(10000 + c));
    auto& per_repo = out[id];
    // Per-CVE coverage varies so missing rates differ across repositories.
    for (const auto& r : RepositoryId::builtins()) {
      if (unit(rng) < 0.1) continue;  // repository has no entry at all
      AspectSet set(id);
      for (std::size_t i = 0; i < 5; ++i) {
        double keep = 0.3 + 0.15 * static_cast<double>(i % 4);
        if (unit(rng) < keep) {
          const auto& pool = *pools[i];
          set.add(kAllAspects[i],
                  pool[static_cast<std::size_t>(unit(rng) * pool.size()) %
                       pool.size()],
                  r);
        }
      }
      per_repo.emplace(r, std::move(set));
    }
  }
  return out;
}

}  // namespace tvdigest::testing
