#include "tvdigest/service/pipeline.hpp"

#include <algorithm>

#include "tvdigest/evaluation/evaluation.hpp"

namespace tvdigest::service {

namespace {

/// Runs one stage, re-labelling provider failures with the stage name.
template <typename F>
auto run_stage(const char* stage, F&& f) {
  try {
    return f();
  } catch (const ProviderError& e) {
    throw ProviderError(e.code(), std::string(stage) + ": " + e.what(), stage);
  } catch (const Error& e) {
    if (!is_provider_error(e.code())) throw;
    throw ProviderError(e.code(), std::string(stage) + ": " + e.what(), stage);
  }
}

}  // namespace

PipelineConfig PipelineConfig::from_json(const nlohmann::json& j) {
  PipelineConfig cfg;
  try {
    if (j.contains("mode")) cfg.mode = parse_mode(j.at("mode").get<std::string>());
    cfg.entropy_constraint = j.value("entropy_constraint", true);
    cfg.dispersion_threshold = j.value("dispersion_threshold", 0.2);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kConfigError,
                std::string("malformed pipeline config: ") + e.what());
  }
  if (!(cfg.dispersion_threshold >= 0.0 && cfg.dispersion_threshold <= 1.0)) {
    throw Error(ErrorCode::kConfigError,
                "pipeline.dispersion_threshold must lie in [0,1]");
  }
  return cfg;
}

Pipeline::Pipeline(std::vector<extraction::RegularizationTemplate> templates,
                   std::vector<fusion::MergeExample> examples,
                   std::function<Timestamp()> clock)
    : templates_(std::move(templates)),
      examples_(std::move(examples)),
      clock_(std::move(clock)) {}

DigestLabel Pipeline::generate_label(const CveId& cve,
                                     const std::vector<Tvd>& input,
                                     const PipelineConfig& cfg,
                                     Providers p) const {
  if (input.empty()) {
    throw Error(ErrorCode::kNoSources, "no TVDs for " + cve.str());
  }
  std::vector<Tvd> tvds = input;
  std::stable_sort(tvds.begin(), tvds.end(),
                   [](const Tvd& a, const Tvd& b) { return a.repo < b.repo; });

  DigestLabel label{cve, std::nullopt, {}, {}, {}, {}, {}, cfg.mode, {}};
  std::map<extraction::BasicField, std::vector<std::string>> basic;
  AspectSet all(cve);

  for (const auto& tvd : tvds) {
    if (tvd.cve_id != cve) {
      throw Error(ErrorCode::kInvalidArgument,
                  "TVD for " + tvd.cve_id.str() + " passed with " + cve.str());
    }
    auto ex = run_stage("extraction", [&] {
      return extraction::extract_aspects(tvd, cfg.mode, p.llm, templates_);
    });
    if (ex.degraded) {
      label.warnings.push_back("extraction degraded for " + tvd.repo.str() +
                               ": unparseable response");
    }
    auto [it, _] = label.per_source.try_emplace(tvd.repo, cve);
    it->second.merge_from(ex.aspects);
    for (auto& [field, values] : ex.basic) {
      auto& dst = basic[field];
      dst.insert(dst.end(), values.begin(), values.end());
    }
    if (!label.cvss && tvd.cvss) label.cvss = Cvss{*tvd.cvss, tvd.repo};
  }
  for (const auto& [_, set] : label.per_source) all.merge_from(set);

  auto integrity = evaluation::compute_integrity(all);
  label.evaluation.integrity_present = integrity.present;
  label.evaluation.missing = integrity.missing;

  evaluation::AnchorCache anchors(p.llm);
  for (AspectType t : kAllAspects) {
    auto div = run_stage("evaluation", [&] {
      return evaluation::aspect_dispersion(all.values(t), anchors, p.embedder);
    });
    label.evaluation.diversity[t] = {div.dispersion,
                                     evaluation::likert_map(div.dispersion)};
  }

  fusion::MergeOptions merge_opts{cfg.mode, cfg.entropy_constraint, examples_};
  for (AspectType t : kAllAspects) {
    if (!all.present(t)) continue;
    auto merged = run_stage(
        "fusion", [&] { return fusion::merge_aspect(all.values(t), p.llm, merge_opts); });
    auto ground = run_stage("groundedness", [&] {
      return fusion::groundedness(merged.text, tvds, anchors);
    });
    if (merged.fallback) {
      label.warnings.push_back("merge fell back to the longest value for " +
                               std::string(aspect_name(t)));
    }
    label.merged[t] = MergedEntry{merged.text, merged.contributing_sources,
                                  ground.grounded, ground.novel_terms,
                                  merged.entropy_bits, merged.fallback};
  }

  for (auto& [_, set] : label.per_source) {
    for (AspectType t : kAllAspects) {
      for (auto& a : set.mutable_values(t)) {
        if (const auto* words = anchors.peek(a.text)) a.anchor_words = *words;
      }
    }
  }

  label.basic_info.product =
      extraction::rank_variants(basic[extraction::BasicField::kProduct]);
  label.basic_info.component =
      extraction::rank_variants(basic[extraction::BasicField::kComponent]);
  label.basic_info.version =
      extraction::rank_variants(basic[extraction::BasicField::kVersion]);
  label.generated_at = clock_();

  if (auto problems = validate(label); !problems.empty()) {
    throw Error(ErrorCode::kSchemaViolation,
                "assembled label is inconsistent: " + problems.front());
  }
  return label;
}

}  // namespace tvdigest::service
