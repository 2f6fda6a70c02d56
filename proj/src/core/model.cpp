#include "tvdigest/core/model.hpp"

#include <algorithm>
#include <cstdio>
#include <ctime>
#include <regex>
#include <set>

#include "tvdigest/core/text.hpp"

namespace tvdigest {
namespace {

int current_utc_year() {
  std::time_t now = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&now, &tm);
  return tm.tm_year + 1900;
}

}  // namespace

CveId CveId::parse(std::string_view raw) {
  static const std::regex kPattern(R"(^CVE-(\d{4})-\d{4,}$)");
  std::string upper = text::ascii_upper(text::trim(raw));
  std::smatch m;
  if (!std::regex_match(upper, m, kPattern)) {
    throw Error(ErrorCode::kMalformedCveId,
                "malformed CVE-ID: '" + std::string(raw) + "'");
  }
  int year = std::stoi(m[1].str());
  if (year < 1999 || year > current_utc_year() + 1) {
    throw Error(ErrorCode::kMalformedCveId,
                "CVE-ID year out of range: '" + std::string(raw) + "'");
  }
  return CveId(std::move(upper));
}

int CveId::year() const { return std::stoi(value_.substr(4, 4)); }

const RepositoryId& RepositoryId::cve() { return builtins()[0]; }
const RepositoryId& RepositoryId::ibm() { return builtins()[1]; }
const RepositoryId& RepositoryId::cnnvd() { return builtins()[2]; }
const RepositoryId& RepositoryId::jvn() { return builtins()[3]; }

const std::array<RepositoryId, 4>& RepositoryId::builtins() {
  static const std::array<RepositoryId, 4> kBuiltins = {
      RepositoryId("CVE", 0), RepositoryId("IBM", 1), RepositoryId("CNNVD", 2),
      RepositoryId("JVN", 3)};
  return kBuiltins;
}

RepositoryId RepositoryId::parse(std::string_view raw) {
  std::string upper = text::ascii_upper(raw);
  for (const auto& b : builtins()) {
    if (b.id_ == upper) return b;
  }
  if (!text::is_ascii_token(raw)) {
    throw Error(ErrorCode::kInvalidRepository,
                "repository id must be a non-empty ASCII token: '" +
                    std::string(raw) + "'");
  }
  return RepositoryId(text::ascii_lower(raw), 4);
}

Timestamp Timestamp::parse(std::string_view iso) {
  std::tm tm{};
  char z = 0;
  std::string s(iso);
  int n = std::sscanf(s.c_str(), "%4d-%2d-%2dT%2d:%2d:%2d%c", &tm.tm_year,
                      &tm.tm_mon, &tm.tm_mday, &tm.tm_hour, &tm.tm_min,
                      &tm.tm_sec, &z);
  if (n != 7 || z != 'Z' || s.size() != 20) {
    throw Error(ErrorCode::kParseError,
                "timestamp must be YYYY-MM-DDTHH:MM:SSZ: '" + s + "'");
  }
  tm.tm_year -= 1900;
  tm.tm_mon -= 1;
  std::time_t t = timegm(&tm);
  return Timestamp(std::chrono::sys_seconds(std::chrono::seconds(t)));
}

Timestamp Timestamp::now() {
  return Timestamp(
      std::chrono::floor<std::chrono::seconds>(std::chrono::system_clock::now()));
}

std::string Timestamp::str() const {
  std::time_t t = static_cast<std::time_t>(value_.time_since_epoch().count());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::string_view aspect_name(AspectType t) {
  switch (t) {
    case AspectType::kVulnerabilityType: return "VulnerabilityType";
    case AspectType::kAttackVector: return "AttackVector";
    case AspectType::kAttackerType: return "AttackerType";
    case AspectType::kRootCause: return "RootCause";
    case AspectType::kImpact: return "Impact";
  }
  return "";
}

std::optional<AspectType> aspect_from_name(std::string_view name) {
  std::string squashed;
  for (char c : name) {
    if (c == ' ' || c == '_' || c == '-') continue;
    squashed.push_back(c);
  }
  squashed = text::ascii_lower(squashed);
  for (AspectType t : kAllAspects) {
    if (text::ascii_lower(aspect_name(t)) == squashed) return t;
  }
  return std::nullopt;
}

bool AspectSet::add(AspectType t, std::string_view raw,
                    const RepositoryId& source,
                    std::vector<std::string> anchor_words) {
  std::string normalized = text::normalize(raw);
  if (normalized.empty()) return false;
  auto& list = entries_[index(t)];
  for (const auto& existing : list) {
    if (existing.source == source && existing.text == normalized) return false;
  }
  list.push_back(KeyAspect{t, std::move(normalized), source,
                           std::move(anchor_words)});
  return true;
}

AspectSet AspectSet::project(const RepositoryId& source) const {
  AspectSet out(cve_id_);
  for (AspectType t : kAllAspects) {
    for (const auto& a : entries_[index(t)]) {
      if (a.source == source) out.entries_[index(t)].push_back(a);
    }
  }
  return out;
}

void AspectSet::merge_from(const AspectSet& other) {
  for (AspectType t : kAllAspects) {
    for (const auto& a : other.values(t)) {
      add(t, a.text, a.source, a.anchor_words);
    }
  }
}

std::string_view mode_name(PipelineMode m) {
  switch (m) {
    case PipelineMode::kConstrained: return "constrained";
    case PipelineMode::kVanilla: return "vanilla";
    case PipelineMode::kCot: return "cot";
  }
  return "";
}

PipelineMode parse_mode(std::string_view name) {
  std::string n = text::ascii_lower(name);
  if (n == "constrained") return PipelineMode::kConstrained;
  if (n == "vanilla") return PipelineMode::kVanilla;
  if (n == "cot") return PipelineMode::kCot;
  throw Error(ErrorCode::kInvalidArgument,
              "unknown pipeline mode '" + std::string(name) + "'");
}

std::vector<std::string> validate(const DigestLabel& label) {
  std::vector<std::string> problems;
  const auto& ev = label.evaluation;
  if (ev.integrity_present < 0 || ev.integrity_present > 5) {
    problems.push_back("evaluation.integrity_present out of range");
  }
  if (ev.integrity_present + static_cast<int>(ev.missing.size()) != 5) {
    problems.push_back("integrity_present + |missing| != 5");
  }
  std::set<AspectType> missing(ev.missing.begin(), ev.missing.end());
  if (missing.size() != ev.missing.size()) {
    problems.push_back("evaluation.missing has duplicates");
  }
  for (AspectType t : kAllAspects) {
    bool has_merged = label.merged.contains(t);
    if (has_merged == missing.contains(t)) {
      problems.push_back("merged[" + std::string(aspect_name(t)) +
                         "] presence disagrees with evaluation.missing");
    }
  }
  for (const auto& [t, entry] : label.merged) {
    if (entry.grounded != entry.novel_terms.empty()) {
      problems.push_back("merged[" + std::string(aspect_name(t)) +
                         "].grounded disagrees with novel_terms");
    }
    for (const auto& src : entry.contributing_sources) {
      auto it = label.per_source.find(src);
      if (it == label.per_source.end() || !it->second.present(t)) {
        problems.push_back("contributing source " + src.str() + " for " +
                           std::string(aspect_name(t)) +
                           " has no per_source entry");
      }
    }
  }
  for (const auto& [t, d] : ev.diversity) {
    if (!(d.dispersion >= 0.0 && d.dispersion <= 1.0)) {
      problems.push_back("diversity dispersion outside [0,1]");
    }
    if (d.likert < 1 || d.likert > 5) {
      problems.push_back("diversity likert outside 1..5");
    }
  }
  if (label.cvss && !(label.cvss->score >= 0.0 && label.cvss->score <= 10.0)) {
    problems.push_back("cvss.score outside [0,10]");
  }
  for (const auto& [repo, set] : label.per_source) {
    if (set.cve_id() != label.cve_id) {
      problems.push_back("per_source[" + repo.str() + "] has a different CVE");
    }
    for (AspectType t : kAllAspects) {
      for (const auto& a : set.values(t)) {
        if (a.source != repo) {
          problems.push_back("per_source[" + repo.str() +
                             "] holds a value attributed to " + a.source.str());
        }
      }
    }
  }
  auto check_ranked = [&](const std::vector<RankedValue>& list,
                          const char* field) {
    for (std::size_t i = 0; i < list.size(); ++i) {
      if (list[i].frequency < 1) {
        problems.push_back(std::string("basic_info.") + field +
                           " frequency < 1");
      }
      if (i > 0 && list[i].frequency > list[i - 1].frequency) {
        problems.push_back(std::string("basic_info.") + field +
                           " not ordered by frequency");
      }
    }
  };
  check_ranked(label.basic_info.product, "product");
  check_ranked(label.basic_info.component, "component");
  check_ranked(label.basic_info.version, "version");
  return problems;
}

}  // namespace tvdigest
