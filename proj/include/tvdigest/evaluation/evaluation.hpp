#pragma once

#include <array>
#include <map>
#include <nlohmann/json.hpp>
#include <string>
#include <vector>

#include "tvdigest/core/model.hpp"
#include "tvdigest/providers/provider.hpp"

namespace tvdigest::evaluation {

inline constexpr std::string_view kNoMissingMessage =
    "There are no missing key aspects";

struct Integrity {
  int present = 0;
  std::vector<AspectType> missing;
};

Integrity compute_integrity(const AspectSet& aspects);

/// "There are no missing key aspects" or "Missing key aspects: A, B".
std::string integrity_message(const Integrity& integrity);

/// Asks the provider for the computer-specific terms of one aspect value.
/// The completion is split on commas and newlines; terms are normalized,
/// lower-cased and deduplicated in order of first appearance.
std::vector<std::string> extract_anchor_words(
    std::string_view aspect_text, providers::CompletionProvider& llm);

/// Parsing half of extract_anchor_words, exposed for reuse.
std::vector<std::string> parse_anchor_terms(std::string_view completion);

/// Memoizes anchor extraction by normalized text so one value is never
/// sent twice within a label.
class AnchorCache {
 public:
  explicit AnchorCache(providers::CompletionProvider& llm) : llm_(llm) {}
  const std::vector<std::string>& get(std::string_view text);
  /// Cached terms without calling the provider; nullptr when unseen.
  const std::vector<std::string>* peek(std::string_view text) const;

 private:
  providers::CompletionProvider& llm_;
  std::map<std::string, std::vector<std::string>> cache_;
};

/// Dispersion of one aspect type. `pairwise_sims` is the full n x n matrix
/// over every ordered pair, self-pairs included.
struct DiversityComputation {
  std::vector<KeyAspect> aspects;
  std::vector<std::vector<double>> pairwise_sims;
  double mean_sim = 1.0;
  double dispersion = 0.0;
};

/// With one value or none, mean_sim is 1 and dispersion 0 and no provider
/// is called. Otherwise each value's anchor words are joined with spaces
/// and embedded (empty anchors embed as the zero vector) and the mean
/// cosine over the full matrix gives dispersion = clamp(1 - mean, 0, 1).
/// The returned aspects carry their anchor words.
DiversityComputation aspect_dispersion(const std::vector<KeyAspect>& values,
                                       AnchorCache& anchors,
                                       providers::Embedder& embedder);

DiversityComputation aspect_dispersion(const std::vector<KeyAspect>& values,
                                       providers::CompletionProvider& llm,
                                       providers::Embedder& embedder);

/// Half-open 0.2-wide bins: [0,0.2) -> 1, ..., [0.8,1.0] -> 5.
int likert_map(double dispersion);

struct ChartData {
  /// true = aspect present (filled slice), false = blank slice.
  std::array<bool, kAspectCount> pie{};
  std::array<int, kAspectCount> radar{};
  /// Aspect types whose Likert level exceeds 2.
  std::vector<AspectType> notes;
  std::string integrity_message;
};

ChartData chart_data(const EvaluationScores& scores);
nlohmann::json to_json(const ChartData& c);

}  // namespace tvdigest::evaluation
