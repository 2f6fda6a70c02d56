#pragma once

#include <functional>
#include <vector>

#include "tvdigest/core/model.hpp"
#include "tvdigest/extraction/extraction.hpp"
#include "tvdigest/fusion/fusion.hpp"
#include "tvdigest/providers/provider.hpp"

namespace tvdigest::service {

struct PipelineConfig {
  PipelineMode mode = PipelineMode::kConstrained;
  /// false omits the entropy lines from merge prompts.
  bool entropy_constraint = true;
  double dispersion_threshold = 0.2;

  static PipelineConfig from_json(const nlohmann::json& j);
};

struct Providers {
  providers::CompletionProvider& llm;
  providers::Embedder& embedder;
};

/// Stateless apart from its configuration data; safe to share.
class Pipeline {
 public:
  Pipeline(std::vector<extraction::RegularizationTemplate> templates =
               extraction::default_templates(),
           std::vector<fusion::MergeExample> examples =
               fusion::default_merge_examples(),
           std::function<Timestamp()> clock = Timestamp::now);

  /// Extraction per TVD, evaluation over the union of sources, fusion per
  /// present aspect type, groundedness per merged text, then assembly.
  /// Throws kNoSources for an empty list; provider errors are rethrown as
  /// ProviderError carrying the failing stage.
  DigestLabel generate_label(const CveId& cve, const std::vector<Tvd>& tvds,
                             const PipelineConfig& cfg, Providers p) const;

 private:
  std::vector<extraction::RegularizationTemplate> templates_;
  std::vector<fusion::MergeExample> examples_;
  std::function<Timestamp()> clock_;
};

}  // namespace tvdigest::service
