#pragma once

#include <filesystem>
#include <nlohmann/json.hpp>
#include <string>
#include <vector>

#include "tvdigest/core/model.hpp"
#include "tvdigest/core/text.hpp"
#include "tvdigest/evaluation/evaluation.hpp"
#include "tvdigest/providers/provider.hpp"

namespace tvdigest::fusion {

using text::tokenize;

struct EntropyResult {
  EntropyInput input;
  double bits = 0.0;
};

/// Shannon entropy in bits of the word distribution of the concatenated
/// token streams: H = -sum over distinct w of p(w) log2 p(w), with
/// p(w) = count(w) / total tokens. Throws Error(kEmptyInput) when there
/// are no tokens at all.
EntropyResult shannon_entropy(const std::vector<std::string>& sentences);

/// One supervised few-shot example for the merge prompt.
struct MergeExample {
  std::vector<std::string> sentence_list;
  double entropy_bits = 0.0;
  std::string merge_result;
};

/// Three neutral shipped examples.
std::vector<MergeExample> default_merge_examples();

/// Recomputes every example's entropy and rejects any that differ from the
/// stored value by more than 1e-9 (kConfigError).
std::vector<MergeExample> merge_examples_from_json(const nlohmann::json& j);
nlohmann::json merge_examples_to_json(const std::vector<MergeExample>& ex);
std::vector<MergeExample> load_merge_examples(const std::filesystem::path& p);

/// Shortest decimal rendering used for the "Information entropy" lines.
std::string format_entropy(double bits);

struct MergePromptOptions {
  /// false drops the "Information entropy" lines.
  bool include_entropy = true;
};

/// Few-shot examples, then the task block with the actual sentence list,
/// ending on "Merge result:". Throws kTooFewValues (< 2 values) or
/// kNoExamples.
std::string build_merge_prompt(const std::vector<KeyAspect>& values,
                               double entropy_bits,
                               const std::vector<MergeExample>& examples,
                               MergePromptOptions opts = {});

/// Baseline merge prompts without entropy or examples.
std::string build_baseline_merge_prompt(const std::vector<KeyAspect>& values,
                                        PipelineMode mode);

struct MergedAspect {
  AspectType aspect_type;
  std::string text;
  std::vector<RepositoryId> contributing_sources;
  double entropy_bits = 0.0;
  bool grounded = true;
  std::vector<std::string> novel_terms;
  /// Set when the provider returned nothing usable and the longest input
  /// value was used instead.
  bool fallback = false;
  int provider_calls = 0;
};

struct MergeOptions {
  PipelineMode mode = PipelineMode::kConstrained;
  bool entropy_constraint = true;
  std::vector<MergeExample> examples = default_merge_examples();
};

inline constexpr int kMergeReprompts = 2;

/// First non-empty paragraph of a completion, trimmed, with any echoed
/// "Merge result:" prefix removed.
std::string first_paragraph(std::string_view completion);

/// Values sharing one normalized text merge by identity: the text passes
/// through verbatim with no provider call. Otherwise one completion (plus
/// up to two re-prompts when empty).
MergedAspect merge_aspect(const std::vector<KeyAspect>& values,
                          providers::CompletionProvider& llm,
                          const MergeOptions& opts = {});

struct Groundedness {
  bool grounded = true;
  std::vector<std::string> novel_terms;
};

/// Token-boundary substring check of anchor terms against source texts.
/// Both sides are reduced to space-joined tokens before matching, so
/// "cpu models" matches "CPU models," but "over" does not match "overflow".
Groundedness check_terms(const std::vector<std::string>& terms,
                         const std::vector<Tvd>& sources);

/// Anchor terms of `merged` (via the provider) checked against the
/// sources. This is an automated proxy for human hallucination labels.
Groundedness groundedness(std::string_view merged,
                          const std::vector<Tvd>& sources,
                          evaluation::AnchorCache& anchors);
Groundedness groundedness(std::string_view merged,
                          const std::vector<Tvd>& sources,
                          providers::CompletionProvider& llm);

/// Percentage of entries with grounded == false. Throws kEmptyInput.
double hallucination_rate(const std::vector<bool>& grounded_flags);

}  // namespace tvdigest::fusion
