#include "tvdigest/evaluation/evaluation.hpp"

#include <algorithm>
#include <cmath>

#include "tvdigest/core/prompt_markers.hpp"
#include "tvdigest/core/text.hpp"

namespace tvdigest::evaluation {

Integrity compute_integrity(const AspectSet& aspects) {
  Integrity out;
  for (AspectType t : kAllAspects) {
    if (aspects.present(t)) {
      ++out.present;
    } else {
      out.missing.push_back(t);
    }
  }
  return out;
}

std::string integrity_message(const Integrity& integrity) {
  if (integrity.missing.empty()) return std::string(kNoMissingMessage);
  std::string msg = "Missing key aspects: ";
  for (std::size_t i = 0; i < integrity.missing.size(); ++i) {
    if (i > 0) msg += ", ";
    msg += aspect_name(integrity.missing[i]);
  }
  return msg;
}

std::vector<std::string> parse_anchor_terms(std::string_view completion) {
  std::vector<std::string> terms;
  std::string current;
  auto flush = [&] {
    std::string t = text::fold(current);
    current.clear();
    // Drop list decoration such as "1." or "-" and wrapping quotes.
    if (auto dot = t.find(". "); dot != std::string::npos && dot <= 3 &&
        std::all_of(t.begin(), t.begin() + static_cast<long>(dot), ::isdigit)) {
      t = t.substr(dot + 2);
    }
    while (!t.empty() && (t.front() == '-' || t.front() == '*' ||
                          t.front() == '"' || t.front() == '\'')) {
      t = text::trim(std::string_view(t).substr(1));
    }
    while (!t.empty() && (t.back() == '"' || t.back() == '\'' ||
                          t.back() == '.')) {
      t.pop_back();
    }
    t = text::trim(t);
    if (!t.empty() && std::find(terms.begin(), terms.end(), t) == terms.end()) {
      terms.push_back(std::move(t));
    }
  };
  for (char c : completion) {
    if (c == ',' || c == '\n') {
      flush();
    } else {
      current.push_back(c);
    }
  }
  flush();
  return terms;
}

std::vector<std::string> extract_anchor_words(
    std::string_view aspect_text, providers::CompletionProvider& llm) {
  std::string sentence = text::normalize(aspect_text);
  if (sentence.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "aspect text is empty");
  }
  providers::CompletionRequest req{
      std::string(prompts::kAnchorInstruction) + sentence,
      providers::kDefaultMaxTokens, providers::kDefaultTemperature,
      std::string(prompts::kTagAnchor)};
  return parse_anchor_terms(llm.complete(req));
}

const std::vector<std::string>& AnchorCache::get(std::string_view text) {
  std::string key = text::normalize(text);
  auto it = cache_.find(key);
  if (it == cache_.end()) {
    it = cache_.emplace(key, extract_anchor_words(key, llm_)).first;
  }
  return it->second;
}

const std::vector<std::string>* AnchorCache::peek(std::string_view text) const {
  auto it = cache_.find(text::normalize(text));
  return it == cache_.end() ? nullptr : &it->second;
}

DiversityComputation aspect_dispersion(const std::vector<KeyAspect>& values,
                                       AnchorCache& anchors,
                                       providers::Embedder& embedder) {
  DiversityComputation out;
  out.aspects = values;
  const std::size_t n = values.size();
  if (n <= 1) {
    out.pairwise_sims.assign(n, std::vector<double>(n, 1.0));
    return out;
  }
  std::vector<providers::EmbeddingVector> vecs;
  vecs.reserve(n);
  for (auto& a : out.aspects) {
    a.anchor_words = anchors.get(a.text);
    std::string joined;
    for (const auto& w : a.anchor_words) {
      if (!joined.empty()) joined.push_back(' ');
      joined += w;
    }
    if (text::tokenize(joined).empty()) {
      vecs.push_back(providers::EmbeddingVector::zeros(embedder.dimension()));
    } else {
      vecs.push_back(embedder.embed(joined));
    }
  }
  out.pairwise_sims.assign(n, std::vector<double>(n, 0.0));
  double sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      double s = providers::cosine(vecs[i], vecs[j]);
      out.pairwise_sims[i][j] = s;
      sum += s;
    }
  }
  out.mean_sim = sum / static_cast<double>(n * n);
  out.dispersion = std::clamp(1.0 - out.mean_sim, 0.0, 1.0);
  return out;
}

DiversityComputation aspect_dispersion(const std::vector<KeyAspect>& values,
                                       providers::CompletionProvider& llm,
                                       providers::Embedder& embedder) {
  AnchorCache cache(llm);
  return aspect_dispersion(values, cache, embedder);
}

int likert_map(double dispersion) {
  double d = std::isnan(dispersion) ? 0.0 : std::clamp(dispersion, 0.0, 1.0);
  // The epsilon keeps decimal bin edges such as 0.6 (stored as
  // 0.59999999999999998) in the upper bin.
  int level = static_cast<int>(std::floor(d / 0.2 + 1e-9)) + 1;
  return std::min(5, level);
}

ChartData chart_data(const EvaluationScores& scores) {
  ChartData c;
  c.pie.fill(true);
  c.radar.fill(1);
  Integrity integrity{scores.integrity_present, scores.missing};
  for (AspectType t : scores.missing) c.pie[index(t)] = false;
  for (AspectType t : kAllAspects) {
    auto it = scores.diversity.find(t);
    if (it != scores.diversity.end()) c.radar[index(t)] = it->second.likert;
    if (c.radar[index(t)] > 2) c.notes.push_back(t);
  }
  c.integrity_message = integrity_message(integrity);
  return c;
}

nlohmann::json to_json(const ChartData& c) {
  nlohmann::json pie = nlohmann::json::array();
  nlohmann::json radar = nlohmann::json::array();
  for (AspectType t : kAllAspects) {
    pie.push_back({{"aspect", aspect_name(t)}, {"present", c.pie[index(t)]}});
    radar.push_back({{"aspect", aspect_name(t)}, {"level", c.radar[index(t)]}});
  }
  nlohmann::json notes = nlohmann::json::array();
  for (AspectType t : c.notes) notes.push_back(aspect_name(t));
  return {{"pie", std::move(pie)},
          {"radar", std::move(radar)},
          {"notes", std::move(notes)},
          {"integrity_message", c.integrity_message}};
}

}  // namespace tvdigest::evaluation
