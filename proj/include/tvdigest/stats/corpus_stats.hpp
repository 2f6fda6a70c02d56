#pragma once

#include <functional>
#include <map>
#include <nlohmann/json.hpp>
#include <set>
#include <string>
#include <vector>

#include "tvdigest/core/model.hpp"
#include "tvdigest/providers/provider.hpp"

namespace tvdigest::stats {

/// Per-CVE, per-repository extracted aspects. A repository absent from a
/// CVE's map counts as missing every aspect for that CVE.
using CorpusAspects = std::map<CveId, std::map<RepositoryId, AspectSet>>;

/// Dispersion of one CVE's values for one aspect type (all repositories).
using DispersionFn =
    std::function<double(const CveId&, const std::vector<KeyAspect>&)>;

/// 1.0 when the values hold two or more distinct case-folded texts, else
/// 0.0. Needs no provider.
DispersionFn exact_distinctness();

/// Anchor-word dispersion through the given providers.
DispersionFn provider_dispersion(providers::CompletionProvider& llm,
                                 providers::Embedder& embedder);

inline constexpr double kDefaultInconsistencyThreshold = 0.2;

double missing_rate(const CorpusAspects& groups, const RepositoryId& repo,
                    AspectType aspect);
double merged_missing_rate(const CorpusAspects& groups, AspectType aspect);

/// Among CVEs with two or more values, the fraction whose dispersion
/// exceeds tau; the denominator is every CVE with at least one value
/// (0.0 when there is none).
double inconsistency_rate(const CorpusAspects& groups, AspectType aspect,
                          double tau, const DispersionFn& dispersion);

/// Distinct case-folded values per CVE -> number of CVEs. CVEs without a
/// value are not counted.
std::map<int, int> value_count_histogram(const CorpusAspects& groups,
                                         AspectType aspect);

/// Mean token count over every value of the aspect. Throws kEmptyCorpus
/// when there are no values.
double mean_word_length(const CorpusAspects& groups, AspectType aspect);

struct CorpusMetrics {
  std::map<std::pair<RepositoryId, AspectType>, double> missing_rate;
  std::map<AspectType, double> merged_missing_rate;
  std::map<AspectType, double> inconsistency_rate;
  std::map<AspectType, std::map<int, int>> value_count_histogram;
  /// Absent for aspect types without any value.
  std::map<AspectType, double> mean_word_length;
  std::size_t cve_count = 0;
};

/// Repositories are the union of those present in `groups` and `repos`.
CorpusMetrics compute_metrics(const CorpusAspects& groups, double tau,
                              const DispersionFn& dispersion,
                              const std::set<RepositoryId>& repos = {});

nlohmann::json to_json(const CorpusMetrics& m);
/// Header plus one row per (repository, aspect type).
std::string to_csv(const CorpusMetrics& m);

}  // namespace tvdigest::stats
