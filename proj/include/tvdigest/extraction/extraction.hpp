#pragma once

#include <array>
#include <filesystem>
#include <map>
#include <nlohmann/json.hpp>
#include <string>
#include <vector>

#include "tvdigest/core/model.hpp"
#include "tvdigest/providers/provider.hpp"

namespace tvdigest::extraction {

/// A human guideline for one aspect type, embedded verbatim in the
/// constrained extraction prompt in place of in-context examples.
struct RegularizationTemplate {
  AspectType aspect_type;
  std::string pattern_description;
  std::vector<std::string> cue_phrases;
  std::string example_phrasing;

  friend bool operator==(const RegularizationTemplate&,
                         const RegularizationTemplate&) = default;
};

/// Starter registry, one template per aspect type.
std::vector<RegularizationTemplate> default_templates();

std::vector<RegularizationTemplate> templates_from_json(const nlohmann::json& j);
nlohmann::json templates_to_json(const std::vector<RegularizationTemplate>& t);
std::vector<RegularizationTemplate> load_templates(
    const std::filesystem::path& path);

enum class BasicField : std::size_t { kProduct = 0, kComponent, kVersion };
inline constexpr std::array<BasicField, 3> kAllBasicFields = {
    BasicField::kProduct, BasicField::kComponent, BasicField::kVersion};
std::string_view basic_field_name(BasicField f);

struct ExtractionResponse {
  std::string raw;
  std::map<AspectType, std::vector<std::string>> parsed;
  std::map<BasicField, std::vector<std::string>> basic;
};

/// Constrained prompt: task instruction, one rule block per aspect type,
/// the TVD text, and the required "Label: <value or NONE>" output lines.
/// Throws Error(kMissingTemplate) naming the first uncovered aspect type.
std::string build_extraction_prompt(
    const Tvd& tvd, const std::vector<RegularizationTemplate>& templates);

/// Single-TVD form of the plain "return the key aspects" baseline.
std::string build_vanilla_prompt(const Tvd& tvd);

/// Baseline with explicit step-by-step reasoning instructions.
std::string build_cot_prompt(const Tvd& tvd);

/// Reads "Label: value" lines. NONE (any case) yields no value; unlabeled
/// lines are ignored; repeated labels accumulate. Throws
/// Error(kUnparseableResponse) if no labeled line is present.
ExtractionResponse parse_extraction_response(const std::string& raw);

struct Extraction {
  AspectSet aspects;
  std::map<BasicField, std::vector<std::string>> basic;
  /// Set when every attempt returned unparseable output.
  bool degraded = false;
  int provider_calls = 0;
};

inline constexpr int kExtractionReprompts = 2;

/// Empty TVD text short-circuits to an all-missing set with no provider
/// call. Otherwise one completion (plus up to two re-prompts on
/// unparseable output).
Extraction extract_aspects(
    const Tvd& tvd, PipelineMode mode, providers::CompletionProvider& llm,
    const std::vector<RegularizationTemplate>& templates = default_templates());

/// Groups case-insensitively after normalization; orders by frequency
/// descending, then first appearance. The displayed value is the first
/// spelling seen.
std::vector<RankedValue> rank_variants(const std::vector<std::string>& values);

}  // namespace tvdigest::extraction
