#include "tvdigest/stats/corpus_stats.hpp"

#include <sstream>

#include "tvdigest/core/text.hpp"
#include "tvdigest/evaluation/evaluation.hpp"

namespace tvdigest::stats {

namespace {

void require_nonempty(const CorpusAspects& groups) {
  if (groups.empty()) {
    throw Error(ErrorCode::kEmptyCorpus, "corpus has no CVE groups");
  }
}

std::vector<KeyAspect> all_values(const std::map<RepositoryId, AspectSet>& g,
                                  AspectType aspect) {
  std::vector<KeyAspect> out;
  for (const auto& [_, set] : g) {
    const auto& v = set.values(aspect);
    out.insert(out.end(), v.begin(), v.end());
  }
  return out;
}

std::set<std::string> distinct_folded(const std::vector<KeyAspect>& values) {
  std::set<std::string> out;
  for (const auto& v : values) out.insert(text::fold(v.text));
  return out;
}

std::string format_rate(double v) {
  std::ostringstream out;
  out.precision(6);
  out << v;
  return out.str();
}

}  // namespace

DispersionFn exact_distinctness() {
  return [](const CveId&, const std::vector<KeyAspect>& values) {
    return distinct_folded(values).size() >= 2 ? 1.0 : 0.0;
  };
}

DispersionFn provider_dispersion(providers::CompletionProvider& llm,
                                 providers::Embedder& embedder) {
  return [&llm, &embedder](const CveId&, const std::vector<KeyAspect>& values) {
    return evaluation::aspect_dispersion(values, llm, embedder).dispersion;
  };
}

double missing_rate(const CorpusAspects& groups, const RepositoryId& repo,
                    AspectType aspect) {
  require_nonempty(groups);
  std::size_t covered = 0;
  for (const auto& [_, g] : groups) {
    auto it = g.find(repo);
    if (it != g.end() && it->second.present(aspect)) ++covered;
  }
  return 1.0 - static_cast<double>(covered) / static_cast<double>(groups.size());
}

double merged_missing_rate(const CorpusAspects& groups, AspectType aspect) {
  require_nonempty(groups);
  std::size_t covered = 0;
  for (const auto& [_, g] : groups) {
    for (const auto& [repo, set] : g) {
      if (set.present(aspect)) {
        ++covered;
        break;
      }
    }
  }
  return 1.0 - static_cast<double>(covered) / static_cast<double>(groups.size());
}

double inconsistency_rate(const CorpusAspects& groups, AspectType aspect,
                          double tau, const DispersionFn& dispersion) {
  require_nonempty(groups);
  if (!(tau >= 0.0 && tau <= 1.0)) {
    throw Error(ErrorCode::kInvalidArgument, "tau must lie in [0,1]");
  }
  std::size_t with_value = 0;
  std::size_t inconsistent = 0;
  for (const auto& [cve, g] : groups) {
    auto values = all_values(g, aspect);
    if (values.empty()) continue;
    ++with_value;
    if (values.size() >= 2 && dispersion(cve, values) > tau) ++inconsistent;
  }
  if (with_value == 0) return 0.0;
  return static_cast<double>(inconsistent) / static_cast<double>(with_value);
}

std::map<int, int> value_count_histogram(const CorpusAspects& groups,
                                         AspectType aspect) {
  std::map<int, int> hist;
  for (const auto& [_, g] : groups) {
    auto distinct = distinct_folded(all_values(g, aspect));
    if (!distinct.empty()) ++hist[static_cast<int>(distinct.size())];
  }
  return hist;
}

double mean_word_length(const CorpusAspects& groups, AspectType aspect) {
  std::size_t values = 0;
  std::size_t words = 0;
  for (const auto& [_, g] : groups) {
    for (const auto& v : all_values(g, aspect)) {
      ++values;
      words += text::tokenize(v.text).size();
    }
  }
  if (values == 0) {
    throw Error(ErrorCode::kEmptyCorpus,
                "no values for " + std::string(aspect_name(aspect)));
  }
  return static_cast<double>(words) / static_cast<double>(values);
}

CorpusMetrics compute_metrics(const CorpusAspects& groups, double tau,
                              const DispersionFn& dispersion,
                              const std::set<RepositoryId>& repos) {
  require_nonempty(groups);
  std::set<RepositoryId> all_repos = repos;
  for (const auto& [_, g] : groups) {
    for (const auto& [repo, __] : g) all_repos.insert(repo);
  }
  CorpusMetrics m;
  m.cve_count = groups.size();
  for (AspectType t : kAllAspects) {
    for (const auto& repo : all_repos) {
      m.missing_rate[{repo, t}] = missing_rate(groups, repo, t);
    }
    m.merged_missing_rate[t] = merged_missing_rate(groups, t);
    m.inconsistency_rate[t] = inconsistency_rate(groups, t, tau, dispersion);
    m.value_count_histogram[t] = value_count_histogram(groups, t);
    try {
      m.mean_word_length[t] = mean_word_length(groups, t);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::kEmptyCorpus) throw;
    }
  }
  return m;
}

nlohmann::json to_json(const CorpusMetrics& m) {
  nlohmann::json missing = nlohmann::json::object();
  for (const auto& [key, rate] : m.missing_rate) {
    missing[key.first.str()][std::string(aspect_name(key.second))] = rate;
  }
  nlohmann::json merged = nlohmann::json::object();
  nlohmann::json incons = nlohmann::json::object();
  nlohmann::json hist = nlohmann::json::object();
  nlohmann::json words = nlohmann::json::object();
  for (AspectType t : kAllAspects) {
    std::string name(aspect_name(t));
    merged[name] = m.merged_missing_rate.at(t);
    incons[name] = m.inconsistency_rate.at(t);
    nlohmann::json h = nlohmann::json::object();
    for (const auto& [count, freq] : m.value_count_histogram.at(t)) {
      h[std::to_string(count)] = freq;
    }
    hist[name] = std::move(h);
    auto it = m.mean_word_length.find(t);
    words[name] = it == m.mean_word_length.end() ? nlohmann::json(nullptr)
                                                 : nlohmann::json(it->second);
  }
  return {{"cve_count", m.cve_count},
          {"missing_rate", std::move(missing)},
          {"merged_missing_rate", std::move(merged)},
          {"inconsistency_rate", std::move(incons)},
          {"value_count_histogram", std::move(hist)},
          {"mean_word_length", std::move(words)}};
}

std::string to_csv(const CorpusMetrics& m) {
  std::ostringstream out;
  out << "repo,aspect,missing_rate,merged_missing_rate,inconsistency_rate,"
         "mean_word_length\n";
  for (const auto& [key, rate] : m.missing_rate) {
    AspectType t = key.second;
    auto words = m.mean_word_length.find(t);
    out << key.first.str() << ',' << aspect_name(t) << ',' << format_rate(rate)
        << ',' << format_rate(m.merged_missing_rate.at(t)) << ','
        << format_rate(m.inconsistency_rate.at(t)) << ','
        << (words == m.mean_word_length.end() ? "" : format_rate(words->second))
        << '\n';
  }
  return out.str();
}

}  // namespace tvdigest::stats
