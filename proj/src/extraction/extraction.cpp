#include "tvdigest/extraction/extraction.hpp"

#include <sstream>

#include "tvdigest/core/prompt_markers.hpp"
#include "tvdigest/core/text.hpp"

namespace tvdigest::extraction {

namespace {

void append_tvd(std::ostringstream& out, const Tvd& tvd) {
  out << "CVE-ID: " << tvd.cve_id.str() << "\n"
      << "Repository: " << tvd.repo.str() << "\n"
      << "TVD:\n"
      << tvd.text << "\n\n";
}

void append_output_format(std::ostringstream& out) {
  out << "Return exactly the following labeled lines, writing NONE when the "
         "TVD does not state the aspect:\n";
  for (AspectType t : kAllAspects) {
    out << aspect_name(t) << ": <value or NONE>\n";
  }
  out << "Also return the affected software on these lines:\n";
  for (BasicField f : kAllBasicFields) {
    out << basic_field_name(f) << ": <value or NONE>\n";
  }
}

std::optional<BasicField> basic_from_label(std::string_view label) {
  std::string l = text::ascii_lower(text::trim(label));
  for (BasicField f : kAllBasicFields) {
    if (text::ascii_lower(basic_field_name(f)) == l) return f;
  }
  return std::nullopt;
}

std::string strip_value(std::string_view raw) {
  std::string v = text::normalize(raw);
  if (v.size() >= 2 && ((v.front() == '"' && v.back() == '"') ||
                        (v.front() == '<' && v.back() == '>'))) {
    v = text::normalize(std::string_view(v).substr(1, v.size() - 2));
  }
  return v;
}

}  // namespace

std::string_view basic_field_name(BasicField f) {
  switch (f) {
    case BasicField::kProduct: return "Product";
    case BasicField::kComponent: return "Component";
    case BasicField::kVersion: return "Version";
  }
  return "";
}

std::string build_extraction_prompt(
    const Tvd& tvd, const std::vector<RegularizationTemplate>& templates) {
  std::ostringstream out;
  out << "You extract the key aspects of a textual vulnerability description "
         "(TVD). Apply the rules below for each key aspect. Copy wording from "
         "the TVD and do not add information it does not contain.\n\n";
  int rule = 1;
  for (AspectType t : kAllAspects) {
    bool found = false;
    for (const auto& tpl : templates) {
      if (tpl.aspect_type != t) continue;
      found = true;
      out << "Rule " << rule++ << " - " << aspect_name(t) << "\n"
          << "Definition: " << tpl.pattern_description << "\n"
          << "Cue phrases:";
      for (std::size_t i = 0; i < tpl.cue_phrases.size(); ++i) {
        out << (i == 0 ? " " : ", ") << '"' << tpl.cue_phrases[i] << '"';
      }
      out << "\n";
      if (!tpl.example_phrasing.empty()) {
        out << "Typical phrasing: " << tpl.example_phrasing << "\n";
      }
      out << "\n";
    }
    if (!found) {
      throw Error(ErrorCode::kMissingTemplate,
                  "no regularization template for " +
                      std::string(aspect_name(t)));
    }
  }
  append_tvd(out, tvd);
  append_output_format(out);
  return out.str();
}

std::string build_vanilla_prompt(const Tvd& tvd) {
  std::ostringstream out;
  out << "Task: \"Based on the provided examples, please return:\"\n";
  append_tvd(out, tvd);
  out << "Please Return: Extracted Key Aspects.\n";
  append_output_format(out);
  return out.str();
}

std::string build_cot_prompt(const Tvd& tvd) {
  std::ostringstream out;
  out << "Instruction: \"Think step by step before answering.\"\n"
         "Step 1: Read all provided TVDs carefully.\n"
         "Step 2: Identify candidate key aspects from each TVD.\n"
         "Step 3: Compare candidate aspects and remove duplicates or "
         "conflicts.\n"
         "Step 4: Return final merged aspects and evaluation.\n\n";
  append_tvd(out, tvd);
  out << "Please Return: Extracted Key Aspects.\n";
  append_output_format(out);
  return out.str();
}

ExtractionResponse parse_extraction_response(const std::string& raw) {
  ExtractionResponse res;
  res.raw = raw;
  for (AspectType t : kAllAspects) res.parsed[t];
  for (BasicField f : kAllBasicFields) res.basic[f];
  std::istringstream in(raw);
  std::string line;
  int labeled = 0;
  while (std::getline(in, line)) {
    std::string l = text::trim(line);
    while (!l.empty() && (l.front() == '-' || l.front() == '*')) {
      l = text::trim(std::string_view(l).substr(1));
    }
    auto colon = l.find(':');
    if (colon == std::string::npos) continue;
    std::string label = text::trim(std::string_view(l).substr(0, colon));
    std::string value = strip_value(std::string_view(l).substr(colon + 1));
    bool none = text::ascii_lower(value) == "none";
    if (auto t = aspect_from_name(label)) {
      ++labeled;
      if (!none && !value.empty()) {
        auto& list = res.parsed[*t];
        if (std::find(list.begin(), list.end(), value) == list.end()) {
          list.push_back(value);
        }
      }
    } else if (auto f = basic_from_label(label)) {
      ++labeled;
      if (!none && !value.empty()) res.basic[*f].push_back(value);
    }
  }
  if (labeled == 0) {
    throw Error(ErrorCode::kUnparseableResponse,
                "completion contains no labeled aspect lines");
  }
  return res;
}

Extraction extract_aspects(const Tvd& tvd, PipelineMode mode,
                           providers::CompletionProvider& llm,
                           const std::vector<RegularizationTemplate>& templates) {
  Extraction out{AspectSet(tvd.cve_id), {}, false, 0};
  for (BasicField f : kAllBasicFields) out.basic[f];
  if (text::normalize(tvd.text).empty()) return out;

  std::string prompt;
  switch (mode) {
    case PipelineMode::kConstrained:
      prompt = build_extraction_prompt(tvd, templates);
      break;
    case PipelineMode::kVanilla:
      prompt = build_vanilla_prompt(tvd);
      break;
    case PipelineMode::kCot:
      prompt = build_cot_prompt(tvd);
      break;
  }
  providers::CompletionRequest req{prompt, providers::kDefaultMaxTokens,
                                   providers::kDefaultTemperature,
                                   std::string(prompts::kTagExtract)};
  for (int attempt = 0; attempt <= kExtractionReprompts; ++attempt) {
    std::string raw = llm.complete(req);
    ++out.provider_calls;
    try {
      ExtractionResponse parsed = parse_extraction_response(raw);
      for (const auto& [t, values] : parsed.parsed) {
        for (const auto& v : values) out.aspects.add(t, v, tvd.repo);
      }
      out.basic = std::move(parsed.basic);
      return out;
    } catch (const Error& e) {
      if (e.code() != ErrorCode::kUnparseableResponse) throw;
    }
  }
  out.degraded = true;
  return out;
}

std::vector<RankedValue> rank_variants(const std::vector<std::string>& values) {
  std::vector<std::string> keys;
  std::vector<RankedValue> ranked;
  for (const auto& v : values) {
    std::string key = text::fold(v);
    if (key.empty()) continue;
    auto it = std::find(keys.begin(), keys.end(), key);
    if (it == keys.end()) {
      keys.push_back(key);
      ranked.push_back({text::normalize(v), 1});
    } else {
      ++ranked[static_cast<std::size_t>(it - keys.begin())].frequency;
    }
  }
  std::stable_sort(ranked.begin(), ranked.end(),
                   [](const RankedValue& a, const RankedValue& b) {
                     return a.frequency > b.frequency;
                   });
  return ranked;
}

}  // namespace tvdigest::extraction
