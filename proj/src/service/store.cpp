#include "tvdigest/service/store.hpp"

#include <algorithm>
#include <fstream>
#include <random>
#include <sstream>

#include "tvdigest/service/document.hpp"

namespace tvdigest::service {

namespace fs = std::filesystem;

LabelStore::LabelStore(fs::path root) : root_(std::move(root)) {
  std::error_code ec;
  fs::create_directories(root_, ec);
  if (ec) {
    throw Error(ErrorCode::kIoError,
                "cannot create store " + root_.string() + ": " + ec.message());
  }
}

fs::path LabelStore::path_for(const CveId& cve) const {
  return root_ / (cve.str() + ".json");
}

std::string LabelStore::store(const DigestLabel& label) {
  if (auto problems = validate(label); !problems.empty()) {
    throw Error(ErrorCode::kSchemaViolation,
                "refusing to store " + label.cve_id.str() + ": " +
                    problems.front());
  }
  std::string bytes = label_bytes(label);
  thread_local std::mt19937_64 rng{std::random_device{}()};
  fs::path final_path = path_for(label.cve_id);
  fs::path tmp = root_ / ("." + label.cve_id.str() + ".json.tmp" +
                          std::to_string(rng()));
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    out << bytes;
    out.flush();
    if (!out) {
      std::error_code ec;
      fs::remove(tmp, ec);
      throw Error(ErrorCode::kIoError, "cannot write " + tmp.string());
    }
  }
  std::error_code ec;
  fs::rename(tmp, final_path, ec);
  if (ec) {
    fs::remove(tmp, ec);
    throw Error(ErrorCode::kIoError,
                "cannot rename into " + final_path.string() + ": " + ec.message());
  }
  return bytes;
}

std::string LabelStore::load_bytes(const CveId& cve) const {
  fs::path p = path_for(cve);
  std::error_code ec;
  if (!fs::exists(p, ec)) {
    throw Error(ErrorCode::kNotFound, "no label stored for " + cve.str());
  }
  std::ifstream in(p, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIoError, "cannot read " + p.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

DigestLabel LabelStore::load(const CveId& cve) const {
  std::string bytes = load_bytes(cve);
  fs::path p = path_for(cve);
  try {
    DigestLabel label = parse_label_document(bytes);
    if (label.cve_id != cve) {
      throw Error(ErrorCode::kSchemaViolation,
                  "label: cve_id " + label.cve_id.str() + " in file for " +
                      cve.str());
    }
    return label;
  } catch (const Error& e) {
    if (e.code() != ErrorCode::kSchemaViolation) throw;
    throw Error(ErrorCode::kSchemaViolation, p.string() + ": " + e.what());
  }
}

bool LabelStore::contains(const CveId& cve) const {
  std::error_code ec;
  return fs::exists(path_for(cve), ec);
}

std::vector<CveId> LabelStore::list() const {
  std::vector<CveId> out;
  for (const auto& entry : fs::directory_iterator(root_)) {
    if (!entry.is_regular_file() || entry.path().extension() != ".json") continue;
    try {
      out.push_back(CveId::parse(entry.path().stem().string()));
    } catch (const Error&) {
      // not a label file
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

KeyedMutex::Guard::Guard(KeyedMutex& owner, std::string key)
    : owner_(owner), key_(std::move(key)) {
  std::unique_lock lock(owner_.mu_);
  owner_.cv_.wait(lock, [&] { return !owner_.held_[key_]; });
  owner_.held_[key_] = true;
}

KeyedMutex::Guard::~Guard() {
  {
    std::lock_guard lock(owner_.mu_);
    owner_.held_.erase(key_);
  }
  owner_.cv_.notify_all();
}

}  // namespace tvdigest::service
