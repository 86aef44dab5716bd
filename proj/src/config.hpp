#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>

namespace mlcl {

/// Key-value configuration file: one `key = value` per line, `#` comments.
/// Entries are kept sorted so a saved file is deterministic.
class Config {
 public:
  Config() = default;

  static Config load(const std::string& path);
  static Config parse(const std::string& text, const std::string& origin = "<string>");
  void save(const std::string& path) const;
  std::string serialize() const;

  void set(const std::string& key, const std::string& value);
  bool has(const std::string& key) const { return entries_.count(key) > 0; }
  std::optional<std::string> get(const std::string& key) const;

  // Typed accessors; a malformed value errors with the field name.
  double get_real(const std::string& key, double fallback) const;
  std::int64_t get_int(const std::string& key, std::int64_t fallback) const;
  std::uint64_t get_uint(const std::string& key, std::uint64_t fallback) const;
  std::string get_string(const std::string& key, const std::string& fallback) const;

  const std::map<std::string, std::string>& entries() const { return entries_; }

 private:
  std::map<std::string, std::string> entries_;
};

}  // namespace mlcl
