#pragma once

#include <array>
#include <chrono>
#include <compare>
#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "tvdigest/core/error.hpp"

namespace tvdigest {

/// Canonical "CVE-YYYY-NNNN..." identifier.
class CveId {
 public:
  /// Accepts any casing of the prefix; rejects malformed ids and years
  /// outside [1999, current year + 1].
  static CveId parse(std::string_view raw);

  const std::string& str() const noexcept { return value_; }
  int year() const;

  friend auto operator<=>(const CveId&, const CveId&) = default;
  friend bool operator==(const CveId&, const CveId&) = default;

 private:
  explicit CveId(std::string value) : value_(std::move(value)) {}
  std::string value_;
};

/// Repository identifier. The four built-ins keep their upper-case names;
/// anything else is a custom lower-case ASCII token.
class RepositoryId {
 public:
  static const RepositoryId& cve();
  static const RepositoryId& ibm();
  static const RepositoryId& cnnvd();
  static const RepositoryId& jvn();
  static const std::array<RepositoryId, 4>& builtins();

  static RepositoryId parse(std::string_view raw);

  const std::string& str() const noexcept { return id_; }
  bool is_builtin() const noexcept { return rank_ < 4; }

  /// Built-ins in {CVE, IBM, CNNVD, JVN} order, customs alphabetically after.
  friend std::strong_ordering operator<=>(const RepositoryId& a,
                                          const RepositoryId& b) {
    if (auto c = a.rank_ <=> b.rank_; c != 0) return c;
    return a.id_ <=> b.id_;
  }
  friend bool operator==(const RepositoryId& a, const RepositoryId& b) {
    return a.id_ == b.id_;
  }

 private:
  RepositoryId(std::string id, int rank) : id_(std::move(id)), rank_(rank) {}
  std::string id_;
  int rank_;
};

/// UTC instant with second resolution, serialized as "YYYY-MM-DDTHH:MM:SSZ".
class Timestamp {
 public:
  Timestamp() = default;
  explicit Timestamp(std::chrono::sys_seconds t) : value_(t) {}

  static Timestamp parse(std::string_view iso);
  static Timestamp now();

  std::chrono::sys_seconds value() const noexcept { return value_; }
  std::string str() const;

  friend auto operator<=>(const Timestamp&, const Timestamp&) = default;
  friend bool operator==(const Timestamp&, const Timestamp&) = default;

 private:
  std::chrono::sys_seconds value_{};
};

struct Cvss {
  double score = 0.0;
  RepositoryId source = RepositoryId::cve();

  friend bool operator==(const Cvss&, const Cvss&) = default;
};

/// One repository's description of one CVE. Empty text means the
/// repository has no entry.
struct Tvd {
  CveId cve_id;
  RepositoryId repo;
  std::string text;
  std::string lang = "en";
  Timestamp retrieved_at;
  std::optional<double> cvss;

  friend bool operator==(const Tvd&, const Tvd&) = default;
};

enum class AspectType : std::size_t {
  kVulnerabilityType = 0,
  kAttackVector,
  kAttackerType,
  kRootCause,
  kImpact,
};

inline constexpr std::size_t kAspectCount = 5;
inline constexpr std::array<AspectType, kAspectCount> kAllAspects = {
    AspectType::kVulnerabilityType, AspectType::kAttackVector,
    AspectType::kAttackerType, AspectType::kRootCause, AspectType::kImpact};

/// "VulnerabilityType", "AttackVector", ...
std::string_view aspect_name(AspectType t);
/// Inverse of aspect_name; also accepts spaced/underscored/any-case forms
/// such as "Root Cause" or "root_cause".
std::optional<AspectType> aspect_from_name(std::string_view name);

constexpr std::size_t index(AspectType t) noexcept {
  return static_cast<std::size_t>(t);
}

struct KeyAspect {
  AspectType aspect_type;
  std::string text;
  RepositoryId source;
  std::vector<std::string> anchor_words;

  friend bool operator==(const KeyAspect&, const KeyAspect&) = default;
};

/// Per-CVE aspect values. All five aspect types are always present; an
/// empty list encodes "missing".
class AspectSet {
 public:
  explicit AspectSet(CveId cve_id) : cve_id_(std::move(cve_id)) {}

  const CveId& cve_id() const noexcept { return cve_id_; }

  /// Normalizes text and appends. Returns false when the text is empty
  /// after normalization or (source, text) is already present.
  bool add(AspectType t, std::string_view text, const RepositoryId& source,
           std::vector<std::string> anchor_words = {});

  const std::vector<KeyAspect>& values(AspectType t) const {
    return entries_[index(t)];
  }
  std::vector<KeyAspect>& mutable_values(AspectType t) {
    return entries_[index(t)];
  }

  bool present(AspectType t) const { return !entries_[index(t)].empty(); }

  /// Restriction to values contributed by one repository.
  AspectSet project(const RepositoryId& source) const;

  /// Appends every value of `other` (same CVE), skipping duplicates.
  void merge_from(const AspectSet& other);

  friend bool operator==(const AspectSet&, const AspectSet&) = default;

 private:
  CveId cve_id_;
  std::array<std::vector<KeyAspect>, kAspectCount> entries_;
};

/// Houses the entropy formula's inputs: the concatenated token stream, the
/// per-token counts, and the stream length.
struct EntropyInput {
  std::vector<std::string> tokens;
  std::map<std::string, std::size_t> counts;
  std::size_t total = 0;
};

struct Diversity {
  double dispersion = 0.0;
  int likert = 1;

  friend bool operator==(const Diversity&, const Diversity&) = default;
};

struct EvaluationScores {
  int integrity_present = 0;
  std::vector<AspectType> missing;
  std::map<AspectType, Diversity> diversity;

  friend bool operator==(const EvaluationScores&,
                         const EvaluationScores&) = default;
};

struct RankedValue {
  std::string value;
  int frequency = 0;

  friend bool operator==(const RankedValue&, const RankedValue&) = default;
};

struct BasicInfo {
  std::vector<RankedValue> product;
  std::vector<RankedValue> component;
  std::vector<RankedValue> version;

  friend bool operator==(const BasicInfo&, const BasicInfo&) = default;
};

enum class PipelineMode { kConstrained, kVanilla, kCot };

std::string_view mode_name(PipelineMode m);
PipelineMode parse_mode(std::string_view name);

struct MergedEntry {
  std::string text;
  std::vector<RepositoryId> contributing_sources;
  bool grounded = true;
  std::vector<std::string> novel_terms;
  double entropy_bits = 0.0;
  bool fallback = false;

  friend bool operator==(const MergedEntry&, const MergedEntry&) = default;
};

struct DigestLabel {
  CveId cve_id;
  std::optional<Cvss> cvss;
  BasicInfo basic_info;
  std::map<AspectType, MergedEntry> merged;
  std::map<RepositoryId, AspectSet> per_source;
  EvaluationScores evaluation;
  Timestamp generated_at;
  PipelineMode pipeline_mode = PipelineMode::kConstrained;
  std::vector<std::string> warnings;

  friend bool operator==(const DigestLabel&, const DigestLabel&) = default;
};

/// Cross-reference checks for a label. Returns one message per violation;
/// empty means the label is internally consistent.
std::vector<std::string> validate(const DigestLabel& label);

}  // namespace tvdigest
