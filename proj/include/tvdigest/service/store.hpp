#pragma once

#include <condition_variable>
#include <filesystem>
#include <map>
#include <mutex>
#include <string>
#include <vector>

#include "tvdigest/core/model.hpp"

namespace tvdigest::service {

/// One JSON document per CVE at <root>/<cve_id>.json. Writes go to a
/// temporary file that is renamed into place.
class LabelStore {
 public:
  explicit LabelStore(std::filesystem::path root);

  const std::filesystem::path& root() const noexcept { return root_; }
  std::filesystem::path path_for(const CveId& cve) const;

  /// Validates, then writes atomically. Returns the stored bytes.
  std::string store(const DigestLabel& label);
  /// kNotFound, kSchemaViolation (message names the path) or kIoError.
  DigestLabel load(const CveId& cve) const;
  std::string load_bytes(const CveId& cve) const;
  bool contains(const CveId& cve) const;
  std::vector<CveId> list() const;

 private:
  std::filesystem::path root_;
};

/// Serializes work per key while letting distinct keys proceed.
class KeyedMutex {
 public:
  class Guard {
   public:
    Guard(KeyedMutex& owner, std::string key);
    ~Guard();
    Guard(const Guard&) = delete;
    Guard& operator=(const Guard&) = delete;

   private:
    KeyedMutex& owner_;
    std::string key_;
  };

  Guard lock(std::string key) { return Guard(*this, std::move(key)); }

 private:
  std::mutex mu_;
  std::condition_variable cv_;
  std::map<std::string, bool> held_;
};

}  // namespace tvdigest::service
