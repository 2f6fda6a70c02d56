#include "tvdigest/core/json.hpp"

#include <cmath>

namespace tvdigest {

using nlohmann::json;

namespace {

[[noreturn]] void violation(const std::string& path, const std::string& what) {
  throw Error(ErrorCode::kSchemaViolation, path + ": " + what);
}

const json& field(const json& j, const char* key, const std::string& path) {
  if (!j.is_object()) violation(path, "expected object");
  auto it = j.find(key);
  if (it == j.end()) violation(path + "." + key, "missing");
  return *it;
}

std::string as_string(const json& j, const std::string& path) {
  if (!j.is_string()) violation(path, "expected string");
  return j.get<std::string>();
}

double as_number(const json& j, const std::string& path) {
  if (!j.is_number()) violation(path, "expected number");
  double v = j.get<double>();
  if (!std::isfinite(v)) violation(path, "non-finite number");
  return v;
}

int as_int(const json& j, const std::string& path) {
  if (!j.is_number_integer()) violation(path, "expected integer");
  return j.get<int>();
}

bool as_bool(const json& j, const std::string& path) {
  if (!j.is_boolean()) violation(path, "expected boolean");
  return j.get<bool>();
}

const json& as_array(const json& j, const std::string& path) {
  if (!j.is_array()) violation(path, "expected array");
  return j;
}

std::vector<std::string> string_list(const json& j, const std::string& path) {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < as_array(j, path).size(); ++i) {
    out.push_back(as_string(j[i], path + "[" + std::to_string(i) + "]"));
  }
  return out;
}

AspectType aspect_key(const std::string& key, const std::string& path) {
  auto t = aspect_from_name(key);
  if (!t || aspect_name(*t) != key) violation(path, "unknown aspect '" + key + "'");
  return *t;
}

template <typename F>
auto guarded(const std::string& path, F&& f) {
  try {
    return f();
  } catch (const Error& e) {
    if (e.code() == ErrorCode::kSchemaViolation) throw;
    violation(path, e.what());
  }
}

json ranked_to_json(const std::vector<RankedValue>& list) {
  json arr = json::array();
  for (const auto& r : list) {
    arr.push_back({{"value", r.value}, {"frequency", r.frequency}});
  }
  return arr;
}

std::vector<RankedValue> ranked_from_json(const json& j,
                                          const std::string& path) {
  std::vector<RankedValue> out;
  for (std::size_t i = 0; i < as_array(j, path).size(); ++i) {
    std::string p = path + "[" + std::to_string(i) + "]";
    out.push_back({as_string(field(j[i], "value", p), p + ".value"),
                   as_int(field(j[i], "frequency", p), p + ".frequency")});
  }
  return out;
}

}  // namespace

json to_json(const KeyAspect& a) {
  return {{"aspect_type", aspect_name(a.aspect_type)},
          {"text", a.text},
          {"source", a.source.str()},
          {"anchor_words", a.anchor_words}};
}

json to_json(const AspectSet& s) {
  json out = json::object();
  for (AspectType t : kAllAspects) {
    json arr = json::array();
    for (const auto& a : s.values(t)) {
      arr.push_back({{"text", a.text},
                     {"source", a.source.str()},
                     {"anchor_words", a.anchor_words}});
    }
    out[std::string(aspect_name(t))] = std::move(arr);
  }
  return out;
}

AspectSet aspect_set_from_json(const CveId& cve, const json& j) {
  const std::string path = "aspects";
  if (!j.is_object()) violation(path, "expected object");
  AspectSet set(cve);
  for (AspectType t : kAllAspects) {
    std::string name(aspect_name(t));
    const json& arr = as_array(field(j, name.c_str(), path), path + "." + name);
    for (std::size_t i = 0; i < arr.size(); ++i) {
      std::string p = path + "." + name + "[" + std::to_string(i) + "]";
      std::string text = as_string(field(arr[i], "text", p), p + ".text");
      RepositoryId src = guarded(p + ".source", [&] {
        return RepositoryId::parse(
            as_string(field(arr[i], "source", p), p + ".source"));
      });
      auto anchors =
          string_list(field(arr[i], "anchor_words", p), p + ".anchor_words");
      if (!set.add(t, text, src, anchors)) {
        violation(p, "empty or duplicate aspect value");
      }
      if (set.values(t).back().text != text) {
        violation(p + ".text", "not in normalized form");
      }
    }
  }
  for (const auto& [key, _] : j.items()) aspect_key(key, path + "." + key);
  return set;
}

json to_json(const EvaluationScores& s) {
  json missing = json::array();
  for (AspectType t : s.missing) missing.push_back(aspect_name(t));
  json diversity = json::object();
  for (const auto& [t, d] : s.diversity) {
    diversity[std::string(aspect_name(t))] = {{"dispersion", d.dispersion},
                                              {"likert", d.likert}};
  }
  return {{"integrity_present", s.integrity_present},
          {"missing", std::move(missing)},
          {"diversity", std::move(diversity)}};
}

EvaluationScores evaluation_from_json(const json& j) {
  const std::string path = "evaluation";
  EvaluationScores s;
  s.integrity_present = as_int(field(j, "integrity_present", path),
                               path + ".integrity_present");
  for (const auto& name :
       string_list(field(j, "missing", path), path + ".missing")) {
    s.missing.push_back(aspect_key(name, path + ".missing"));
  }
  const json& div = field(j, "diversity", path);
  if (!div.is_object()) violation(path + ".diversity", "expected object");
  for (const auto& [key, value] : div.items()) {
    std::string p = path + ".diversity." + key;
    s.diversity[aspect_key(key, p)] = {
        as_number(field(value, "dispersion", p), p + ".dispersion"),
        as_int(field(value, "likert", p), p + ".likert")};
  }
  return s;
}

json to_json(const BasicInfo& b) {
  return {{"product", ranked_to_json(b.product)},
          {"component", ranked_to_json(b.component)},
          {"version", ranked_to_json(b.version)}};
}

BasicInfo basic_info_from_json(const json& j) {
  const std::string path = "basic_info";
  return {ranked_from_json(field(j, "product", path), path + ".product"),
          ranked_from_json(field(j, "component", path), path + ".component"),
          ranked_from_json(field(j, "version", path), path + ".version")};
}

json to_json(const DigestLabel& label) {
  json merged = json::object();
  for (AspectType t : kAllAspects) {
    auto it = label.merged.find(t);
    if (it == label.merged.end()) {
      merged[std::string(aspect_name(t))] = nullptr;
      continue;
    }
    const MergedEntry& m = it->second;
    json sources = json::array();
    for (const auto& s : m.contributing_sources) sources.push_back(s.str());
    merged[std::string(aspect_name(t))] = {
        {"text", m.text},
        {"contributing_sources", std::move(sources)},
        {"grounded", m.grounded},
        {"novel_terms", m.novel_terms},
        {"entropy_bits", m.entropy_bits},
        {"fallback", m.fallback}};
  }
  json per_source = json::object();
  for (const auto& [repo, set] : label.per_source) {
    per_source[repo.str()] = to_json(set);
  }
  json cvss = nullptr;
  if (label.cvss) {
    cvss = {{"score", label.cvss->score}, {"source", label.cvss->source.str()}};
  }
  return {{"schema_version", kLabelSchemaVersion},
          {"cve_id", label.cve_id.str()},
          {"cvss", std::move(cvss)},
          {"basic_info", to_json(label.basic_info)},
          {"merged", std::move(merged)},
          {"per_source", std::move(per_source)},
          {"evaluation", to_json(label.evaluation)},
          {"generated_at", label.generated_at.str()},
          {"pipeline_mode", mode_name(label.pipeline_mode)},
          {"warnings", label.warnings}};
}

DigestLabel label_from_json(const json& j) {
  const std::string root = "label";
  if (!j.is_object()) violation(root, "expected object");
  int version = as_int(field(j, "schema_version", root), "schema_version");
  if (version != kLabelSchemaVersion) {
    violation("schema_version", "unsupported version " + std::to_string(version));
  }
  CveId cve = guarded("cve_id", [&] {
    return CveId::parse(as_string(field(j, "cve_id", root), "cve_id"));
  });
  DigestLabel label{cve, std::nullopt, {}, {}, {}, {}, {}, {}, {}};

  const json& cvss = field(j, "cvss", root);
  if (!cvss.is_null()) {
    double score = as_number(field(cvss, "score", "cvss"), "cvss.score");
    RepositoryId src = guarded("cvss.source", [&] {
      return RepositoryId::parse(
          as_string(field(cvss, "source", "cvss"), "cvss.source"));
    });
    label.cvss = Cvss{score, src};
  }
  label.basic_info = basic_info_from_json(field(j, "basic_info", root));

  const json& merged = field(j, "merged", root);
  if (!merged.is_object()) violation("merged", "expected object");
  for (AspectType t : kAllAspects) {
    std::string name(aspect_name(t));
    const json& m = field(merged, name.c_str(), "merged");
    if (m.is_null()) continue;
    std::string p = "merged." + name;
    MergedEntry e;
    e.text = as_string(field(m, "text", p), p + ".text");
    const json& srcs = as_array(field(m, "contributing_sources", p),
                                p + ".contributing_sources");
    for (const auto& s : srcs) {
      e.contributing_sources.push_back(guarded(p, [&] {
        return RepositoryId::parse(as_string(s, p + ".contributing_sources"));
      }));
    }
    e.grounded = as_bool(field(m, "grounded", p), p + ".grounded");
    e.novel_terms =
        string_list(field(m, "novel_terms", p), p + ".novel_terms");
    e.entropy_bits =
        as_number(field(m, "entropy_bits", p), p + ".entropy_bits");
    e.fallback = as_bool(field(m, "fallback", p), p + ".fallback");
    label.merged.emplace(t, std::move(e));
  }
  for (const auto& [key, _] : merged.items()) aspect_key(key, "merged." + key);

  const json& per_source = field(j, "per_source", root);
  if (!per_source.is_object()) violation("per_source", "expected object");
  for (const auto& [key, value] : per_source.items()) {
    RepositoryId repo = guarded("per_source." + key,
                                [&] { return RepositoryId::parse(key); });
    if (repo.str() != key) violation("per_source." + key, "non-canonical id");
    label.per_source.emplace(repo, guarded("per_source." + key, [&] {
                               return aspect_set_from_json(cve, value);
                             }));
  }

  label.evaluation = evaluation_from_json(field(j, "evaluation", root));
  label.generated_at = guarded("generated_at", [&] {
    return Timestamp::parse(
        as_string(field(j, "generated_at", root), "generated_at"));
  });
  label.pipeline_mode = guarded("pipeline_mode", [&] {
    return parse_mode(
        as_string(field(j, "pipeline_mode", root), "pipeline_mode"));
  });
  label.warnings = string_list(field(j, "warnings", root), "warnings");

  auto problems = validate(label);
  if (!problems.empty()) violation(root, problems.front());
  return label;
}

std::string canonical_dump(const json& j) {
  return j.dump(-1, ' ', false, json::error_handler_t::strict);
}

std::string serialize_record(const Tvd& tvd) {
  nlohmann::ordered_json j;
  j["cve_id"] = tvd.cve_id.str();
  j["repo"] = tvd.repo.str();
  j["text"] = tvd.text;
  j["lang"] = tvd.lang;
  j["retrieved_at"] = tvd.retrieved_at.str();
  if (tvd.cvss) j["cvss"] = *tvd.cvss;
  return j.dump();
}

Tvd parse_record(const json& j) {
  const std::string root = "record";
  if (!j.is_object()) violation(root, "expected object");
  CveId cve = CveId::parse(as_string(field(j, "cve_id", root), "cve_id"));
  RepositoryId repo =
      RepositoryId::parse(as_string(field(j, "repo", root), "repo"));
  Tvd tvd{cve, repo, as_string(field(j, "text", root), "text"), "en", {},
          std::nullopt};
  if (auto it = j.find("lang"); it != j.end()) tvd.lang = as_string(*it, "lang");
  if (tvd.lang.empty()) tvd.lang = "en";
  tvd.retrieved_at = Timestamp::parse(
      as_string(field(j, "retrieved_at", root), "retrieved_at"));
  if (auto it = j.find("cvss"); it != j.end() && !it->is_null()) {
    double score = as_number(*it, "cvss");
    if (score < 0.0 || score > 10.0) violation("cvss", "outside [0,10]");
    tvd.cvss = score;
  }
  return tvd;
}

}  // namespace tvdigest
