#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>

namespace deidkit {

/// Flat `key = value` file. Blank lines and lines starting with '#' are ignored; keys are dotted
/// (`judge.kind`, `retry.max_attempts`). Credentials are never read from here, only the name of
/// the environment variable holding them.
class KeyValueConfig {
 public:
  KeyValueConfig() = default;
  static KeyValueConfig parse(const std::string& text);
  static KeyValueConfig load(const std::filesystem::path& path);

  std::optional<std::string> get(const std::string& key) const;
  std::string get_or(const std::string& key, const std::string& fallback) const;
  std::int64_t get_int(const std::string& key, std::int64_t fallback) const;
  double get_double(const std::string& key, double fallback) const;

  /// Entries whose key starts with prefix, with the prefix stripped.
  std::map<std::string, std::string> with_prefix(const std::string& prefix) const;
  void set(const std::string& key, const std::string& value) { values_[key] = value; }
  const std::map<std::string, std::string>& values() const { return values_; }

 private:
  std::map<std::string, std::string> values_;
};

}  // namespace deidkit
