#include "tvdigest/fusion/fusion.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "tvdigest/core/prompt_markers.hpp"

namespace tvdigest::fusion {

EntropyResult shannon_entropy(const std::vector<std::string>& sentences) {
  EntropyResult out;
  for (const auto& s : sentences) {
    for (auto& t : tokenize(s)) out.input.tokens.push_back(std::move(t));
  }
  out.input.total = out.input.tokens.size();
  if (out.input.total == 0) {
    throw Error(ErrorCode::kEmptyInput, "entropy of an empty token stream");
  }
  for (const auto& t : out.input.tokens) ++out.input.counts[t];
  const double total = static_cast<double>(out.input.total);
  double h = 0.0;
  for (const auto& [_, count] : out.input.counts) {
    double p = static_cast<double>(count) / total;
    h -= p * std::log2(p);
  }
  out.bits = h > 0.0 ? h : 0.0;  // no -0.0
  return out;
}

std::vector<MergeExample> default_merge_examples() {
  std::vector<MergeExample> ex = {
      {{"allows remote attackers to execute arbitrary code",
        "allows remote attackers to execute arbitrary code or cause a denial "
        "of service"},
       0.0,
       "allows remote attackers to execute arbitrary code or cause a denial "
       "of service"},
      {{"heap-based buffer overflow", "buffer overflow in the PNG decoder"},
       0.0,
       "heap-based buffer overflow in the PNG decoder"},
      {{"does not validate the length field",
        "improper validation of the packet length in the parser",
        "missing bounds check"},
       0.0,
       "the parser does not validate the packet length field and lacks a "
       "bounds check"},
  };
  for (auto& e : ex) e.entropy_bits = shannon_entropy(e.sentence_list).bits;
  return ex;
}

std::vector<MergeExample> merge_examples_from_json(const nlohmann::json& j) {
  if (!j.is_array()) {
    throw Error(ErrorCode::kConfigError, "merge examples must be an array");
  }
  std::vector<MergeExample> out;
  for (const auto& item : j) {
    MergeExample e;
    try {
      e.sentence_list = item.at("sentence_list").get<std::vector<std::string>>();
      e.entropy_bits = item.at("entropy_bits").get<double>();
      e.merge_result = item.at("merge_result").get<std::string>();
    } catch (const nlohmann::json::exception& ex) {
      throw Error(ErrorCode::kConfigError,
                  std::string("malformed merge example: ") + ex.what());
    }
    double recomputed = shannon_entropy(e.sentence_list).bits;
    if (std::abs(recomputed - e.entropy_bits) > 1e-9) {
      throw Error(ErrorCode::kConfigError,
                  "merge example entropy " + std::to_string(e.entropy_bits) +
                      " does not match recomputed " +
                      std::to_string(recomputed));
    }
    out.push_back(std::move(e));
  }
  return out;
}

nlohmann::json merge_examples_to_json(const std::vector<MergeExample>& ex) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& e : ex) {
    arr.push_back({{"sentence_list", e.sentence_list},
                   {"entropy_bits", e.entropy_bits},
                   {"merge_result", e.merge_result}});
  }
  return arr;
}

std::vector<MergeExample> load_merge_examples(const std::filesystem::path& p) {
  std::ifstream in(p);
  if (!in) throw Error(ErrorCode::kIoError, "cannot open " + p.string());
  auto j = nlohmann::json::parse(in, nullptr, false);
  if (j.is_discarded()) {
    throw Error(ErrorCode::kConfigError, p.string() + ": invalid JSON");
  }
  return merge_examples_from_json(j);
}

std::string format_entropy(double bits) {
  std::ostringstream out;
  out.precision(4);
  out << bits;
  return out.str();
}

namespace {

std::string sentence_list_json(const std::vector<std::string>& sentences) {
  return nlohmann::json(sentences).dump();
}

std::vector<std::string> distinct_texts(const std::vector<KeyAspect>& values) {
  std::vector<std::string> out;
  for (const auto& v : values) {
    if (std::find(out.begin(), out.end(), v.text) == out.end()) {
      out.push_back(v.text);
    }
  }
  return out;
}

void append_task_block(std::ostringstream& out,
                       const std::vector<std::string>& sentences,
                       double entropy_bits, bool include_entropy) {
  out << "Task: \"" << prompts::kMergeTask << "\"\n"
      << prompts::kSentenceList << sentence_list_json(sentences) << "\n";
  if (include_entropy) {
    out << prompts::kEntropyLine << format_entropy(entropy_bits)
        << "\n";
  }
}

}  // namespace

std::string build_merge_prompt(const std::vector<KeyAspect>& values,
                               double entropy_bits,
                               const std::vector<MergeExample>& examples,
                               MergePromptOptions opts) {
  if (values.size() < 2) {
    throw Error(ErrorCode::kTooFewValues, "merging needs at least two values");
  }
  if (examples.empty()) {
    throw Error(ErrorCode::kNoExamples, "merge prompt needs an example");
  }
  std::ostringstream out;
  for (std::size_t i = 0; i < examples.size(); ++i) {
    out << "Example" << (i + 1) << ":\n";
    append_task_block(out, examples[i].sentence_list, examples[i].entropy_bits,
                      opts.include_entropy);
    out << prompts::kMergeResult << ": " << examples[i].merge_result << "\n\n";
  }
  std::vector<std::string> sentences;
  for (const auto& v : values) sentences.push_back(v.text);
  out << "Task Description:\n";
  append_task_block(out, sentences, entropy_bits, opts.include_entropy);
  out << prompts::kMergeResult << ":";
  return out.str();
}

std::string build_baseline_merge_prompt(const std::vector<KeyAspect>& values,
                                        PipelineMode mode) {
  if (values.size() < 2) {
    throw Error(ErrorCode::kTooFewValues, "merging needs at least two values");
  }
  std::vector<std::string> sentences;
  for (const auto& v : values) sentences.push_back(v.text);
  std::ostringstream out;
  if (mode == PipelineMode::kCot) {
    out << "Instruction: \"Think step by step before answering.\"\n"
           "Step 1: Read all provided TVDs carefully.\n"
           "Step 2: Identify candidate key aspects from each TVD.\n"
           "Step 3: Compare candidate aspects and remove duplicates or "
           "conflicts.\n"
           "Step 4: Return final merged aspects and evaluation.\n";
  } else {
    out << "Task: \"Based on the provided examples, please return:\"\n";
  }
  out << "Key aspect: " << aspect_name(values.front().aspect_type) << "\n"
      << prompts::kSentenceList << sentence_list_json(sentences) << "\n"
      << "Please Return: Merged Key Aspects.\n"
      << prompts::kMergeResult << ":";
  return out.str();
}

std::string first_paragraph(std::string_view completion) {
  std::istringstream in{std::string(completion)};
  std::string line;
  std::string para;
  while (std::getline(in, line)) {
    std::string t = text::trim(line);
    if (t.empty()) {
      if (!para.empty()) break;
      continue;
    }
    if (!para.empty()) para.push_back(' ');
    para += t;
  }
  std::string prefix = std::string(prompts::kMergeResult) + ":";
  if (para.rfind(prefix, 0) == 0) para = text::trim(para.substr(prefix.size()));
  return text::normalize(para);
}

MergedAspect merge_aspect(const std::vector<KeyAspect>& values,
                          providers::CompletionProvider& llm,
                          const MergeOptions& opts) {
  if (values.empty()) {
    throw Error(ErrorCode::kEmptyInput, "nothing to merge");
  }
  MergedAspect out;
  out.aspect_type = values.front().aspect_type;
  std::set<RepositoryId> sources;
  for (const auto& v : values) sources.insert(v.source);
  out.contributing_sources.assign(sources.begin(), sources.end());

  const std::vector<std::string> texts = distinct_texts(values);
  try {
    out.entropy_bits = shannon_entropy(texts).bits;
  } catch (const Error&) {
    out.entropy_bits = 0.0;
  }
  if (texts.size() == 1) {
    out.text = values.front().text;
    return out;
  }

  std::vector<KeyAspect> distinct;
  for (const auto& t : texts) {
    distinct.push_back(KeyAspect{out.aspect_type, t, values.front().source, {}});
  }
  std::string prompt =
      opts.mode == PipelineMode::kConstrained
          ? build_merge_prompt(distinct, out.entropy_bits, opts.examples,
                               {opts.entropy_constraint})
          : build_baseline_merge_prompt(distinct, opts.mode);
  providers::CompletionRequest req{prompt, providers::kDefaultMaxTokens,
                                   providers::kDefaultTemperature,
                                   std::string(prompts::kTagMerge)};
  for (int attempt = 0; attempt <= kMergeReprompts; ++attempt) {
    std::string merged = first_paragraph(llm.complete(req));
    ++out.provider_calls;
    if (!merged.empty()) {
      out.text = std::move(merged);
      return out;
    }
  }
  out.fallback = true;
  out.text = *std::max_element(
      texts.begin(), texts.end(),
      [](const std::string& a, const std::string& b) { return a.size() < b.size(); });
  return out;
}

Groundedness check_terms(const std::vector<std::string>& terms,
                         const std::vector<Tvd>& sources) {
  std::string haystack;
  for (const auto& s : sources) {
    // Padding keeps matches on token boundaries.
    haystack += " " + text::token_join(s.text) + " \n";
  }
  Groundedness g;
  for (const auto& term : terms) {
    std::string needle = text::token_join(term);
    if (needle.empty()) continue;
    if (haystack.find(" " + needle + " ") == std::string::npos &&
        std::find(g.novel_terms.begin(), g.novel_terms.end(), term) ==
            g.novel_terms.end()) {
      g.novel_terms.push_back(term);
    }
  }
  g.grounded = g.novel_terms.empty();
  return g;
}

Groundedness groundedness(std::string_view merged,
                          const std::vector<Tvd>& sources,
                          evaluation::AnchorCache& anchors) {
  if (sources.empty()) {
    throw Error(ErrorCode::kNoSources, "groundedness needs source TVDs");
  }
  return check_terms(anchors.get(merged), sources);
}

Groundedness groundedness(std::string_view merged,
                          const std::vector<Tvd>& sources,
                          providers::CompletionProvider& llm) {
  evaluation::AnchorCache cache(llm);
  return groundedness(merged, sources, cache);
}

double hallucination_rate(const std::vector<bool>& grounded_flags) {
  if (grounded_flags.empty()) {
    throw Error(ErrorCode::kEmptyInput, "hallucination rate of no aspects");
  }
  auto bad = std::count(grounded_flags.begin(), grounded_flags.end(), false);
  return 100.0 * static_cast<double>(bad) /
         static_cast<double>(grounded_flags.size());
}

}  // namespace tvdigest::fusion
