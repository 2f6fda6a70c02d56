#include "tvdigest/providers/mock.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include "tvdigest/core/prompt_markers.hpp"
#include "tvdigest/core/text.hpp"

namespace tvdigest::providers {

ProviderScript ProviderScript::from_json(const nlohmann::json& j) {
  ProviderScript script;
  try {
    for (const auto& e : j.at("entries")) {
      ScriptEntry entry;
      if (auto m = e.find("match"); m != e.end()) {
        entry.tag = m->value("tag", "");
        entry.substring = m->value("substring", "");
      }
      entry.response = e.at("response").get<std::string>();
      script.entries.push_back(std::move(entry));
    }
    std::string mode = j.value("embedding_mode", "hashed-bag-of-words");
    if (mode == "hashed-bag-of-words") {
      script.embedding_mode = EmbeddingMode::kHashedBagOfWords;
    } else if (mode == "table") {
      script.embedding_mode = EmbeddingMode::kTable;
    } else {
      throw Error(ErrorCode::kConfigError, "unknown embedding_mode '" + mode + "'");
    }
    if (auto t = j.find("embedding_table"); t != j.end()) {
      for (const auto& [key, value] : t->items()) {
        script.embedding_table[text::fold(key)] =
            value.get<std::vector<double>>();
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kConfigError,
                std::string("malformed provider script: ") + e.what());
  }
  return script;
}

ProviderScript ProviderScript::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw Error(ErrorCode::kIoError, "cannot open script " + path.string());
  }
  try {
    return from_json(nlohmann::json::parse(in));
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorCode::kConfigError,
                path.string() + ": " + e.what());
  }
}

nlohmann::json ProviderScript::to_json() const {
  nlohmann::json entries_json = nlohmann::json::array();
  for (const auto& e : entries) {
    entries_json.push_back(
        {{"match", {{"tag", e.tag}, {"substring", e.substring}}},
         {"response", e.response}});
  }
  nlohmann::json j = {{"entries", std::move(entries_json)},
                      {"embedding_mode",
                       embedding_mode == EmbeddingMode::kTable
                           ? "table"
                           : "hashed-bag-of-words"}};
  if (!embedding_table.empty()) j["embedding_table"] = embedding_table;
  return j;
}

ScriptedProvider::ScriptedProvider(ProviderScript script)
    : entries_(std::move(script.entries)), consumed_(entries_.size(), false) {}

std::size_t ScriptedProvider::remaining() const {
  std::lock_guard lock(mu_);
  std::size_t n = 0;
  for (bool c : consumed_) n += c ? 0 : 1;
  return n;
}

std::vector<std::string> ScriptedProvider::history() const {
  std::lock_guard lock(mu_);
  return history_;
}

std::string ScriptedProvider::do_complete(const CompletionRequest& req) {
  std::lock_guard lock(mu_);
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    if (consumed_[i]) continue;
    const auto& e = entries_[i];
    if (!e.tag.empty() && e.tag != req.tag) continue;
    if (!e.substring.empty() &&
        req.prompt.find(e.substring) == std::string::npos) {
      continue;
    }
    if (static_cast<int>(text::tokenize(e.response).size()) > req.max_tokens) {
      throw ProviderError(ErrorCode::kResponseTooLong,
                          "scripted response exceeds max_tokens", req.tag);
    }
    consumed_[i] = true;
    history_.push_back(req.tag);
    return e.response;
  }
  throw ProviderError(ErrorCode::kScriptExhausted,
                      "no script entry matches request tagged '" + req.tag + "'",
                      req.tag);
}

std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

HashedBagEmbedder::HashedBagEmbedder(std::size_t dimension)
    : dimension_(dimension) {
  if (dimension < 8) {
    throw Error(ErrorCode::kConfigError, "embedding dimension must be >= 8");
  }
}

EmbeddingVector HashedBagEmbedder::embed(std::string_view input) {
  auto tokens = text::tokenize(input);
  if (tokens.empty()) {
    throw ProviderError(ErrorCode::kEmptyText, "cannot embed empty text");
  }
  std::vector<double> counts(dimension_, 0.0);
  for (const auto& t : tokens) counts[bucket(t)] += 1.0;
  EmbeddingVector raw(counts);
  double n = raw.norm();
  if (n > 0.0) {
    for (double& c : counts) c /= n;
  }
  return EmbeddingVector(std::move(counts));
}

TableEmbedder::TableEmbedder(std::map<std::string, std::vector<double>> table) {
  for (auto& [key, values] : table) {
    if (dimension_ == 0) dimension_ = values.size();
    if (values.size() != dimension_) {
      throw ProviderError(ErrorCode::kDimensionMismatch,
                          "embedding table rows differ in dimension");
    }
    table_.emplace(text::fold(key), EmbeddingVector(std::move(values)));
  }
}

EmbeddingVector TableEmbedder::embed(std::string_view input) {
  std::string key = text::fold(input);
  if (key.empty()) {
    throw ProviderError(ErrorCode::kEmptyText, "cannot embed empty text");
  }
  auto it = table_.find(key);
  if (it == table_.end()) {
    throw ProviderError(ErrorCode::kProviderUnavailable,
                        "no embedding table entry for '" + key + "'");
  }
  return it->second;
}

namespace {

const std::set<std::string>& stopwords() {
  static const std::set<std::string> kWords = {
      "a", "an", "the", "of", "in", "on", "to", "by", "and", "or", "is",
      "are", "be", "that", "this", "with", "for", "as", "at", "via", "which",
      "does", "not", "it", "its", "from"};
  return kWords;
}

}  // namespace

std::string RecombinationProvider::do_complete(const CompletionRequest& req) {
  const std::string& p = req.prompt;
  if (p.rfind(prompts::kAnchorInstruction, 0) == 0) {
    std::string sentence = p.substr(prompts::kAnchorInstruction.size());
    std::vector<std::string> terms;
    std::set<std::string> seen;
    for (auto& t : text::tokenize(sentence)) {
      if (stopwords().contains(t) || !seen.insert(t).second) continue;
      terms.push_back(t);
    }
    std::string out;
    for (const auto& t : terms) {
      if (!out.empty()) out += ", ";
      out += t;
    }
    return out;
  }
  auto pos = p.rfind(prompts::kSentenceList);
  if (pos != std::string::npos && p.find(prompts::kMergeResult, pos) != std::string::npos) {
    auto begin = pos + prompts::kSentenceList.size();
    auto end = p.find('\n', begin);
    auto list = nlohmann::json::parse(p.substr(begin, end - begin), nullptr,
                                      false);
    if (list.is_array()) {
      std::string out;
      for (const auto& s : list) {
        if (!s.is_string()) continue;
        if (!out.empty()) out += " ";
        out += s.get<std::string>();
      }
      return out;
    }
  }
  if (fallback_ != nullptr) return fallback_->complete(req);
  throw ProviderError(ErrorCode::kScriptExhausted,
                      "recombination provider cannot answer request tagged '" +
                          req.tag + "'",
                      req.tag);
}

}  // namespace tvdigest::providers
