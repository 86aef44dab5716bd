#include "config.hpp"

#include <cstdlib>
#include <fstream>
#include <sstream>

#include "error.hpp"

namespace mlcl {

namespace {

std::string trim(const std::string& s) {
  const auto from = s.find_first_not_of(" \t\r");
  if (from == std::string::npos) return "";
  const auto to = s.find_last_not_of(" \t\r");
  return s.substr(from, to - from + 1);
}

}  // namespace

Config Config::load(const std::string& path) {
  std::ifstream is(path);
  if (!is) fail(ErrorCode::kIo, "cannot open config file: " + path);
  std::ostringstream text;
  text << is.rdbuf();
  return parse(text.str(), path);
}

Config Config::parse(const std::string& text, const std::string& origin) {
  Config cfg;
  std::istringstream is(text);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    const std::string stripped = trim(line);
    if (stripped.empty() || stripped[0] == '#') continue;
    const auto eq = stripped.find('=');
    if (eq == std::string::npos) {
      fail(ErrorCode::kParse,
           origin + ":" + std::to_string(lineno) + ": expected 'key = value'");
    }
    const std::string key = trim(stripped.substr(0, eq));
    const std::string value = trim(stripped.substr(eq + 1));
    if (key.empty()) {
      fail(ErrorCode::kParse, origin + ":" + std::to_string(lineno) + ": empty key");
    }
    cfg.entries_[key] = value;
  }
  return cfg;
}

void Config::save(const std::string& path) const {
  std::ofstream os(path, std::ios::trunc);
  if (!os) fail(ErrorCode::kIo, "cannot write config file: " + path);
  os << serialize();
  if (!os) fail(ErrorCode::kIo, "short write to config file: " + path);
}

std::string Config::serialize() const {
  std::ostringstream os;
  for (const auto& [key, value] : entries_) os << key << " = " << value << "\n";
  return os.str();
}

void Config::set(const std::string& key, const std::string& value) { entries_[key] = value; }

std::optional<std::string> Config::get(const std::string& key) const {
  const auto it = entries_.find(key);
  if (it == entries_.end()) return std::nullopt;
  return it->second;
}

double Config::get_real(const std::string& key, double fallback) const {
  const auto raw = get(key);
  if (!raw) return fallback;
  char* end = nullptr;
  const double v = std::strtod(raw->c_str(), &end);
  if (end == raw->c_str() || *end != '\0') {
    fail(ErrorCode::kParse, "field " + key + ": not a number: '" + *raw + "'");
  }
  return v;
}

std::int64_t Config::get_int(const std::string& key, std::int64_t fallback) const {
  const auto raw = get(key);
  if (!raw) return fallback;
  char* end = nullptr;
  const long long v = std::strtoll(raw->c_str(), &end, 10);
  if (end == raw->c_str() || *end != '\0') {
    fail(ErrorCode::kParse, "field " + key + ": not an integer: '" + *raw + "'");
  }
  return v;
}

std::uint64_t Config::get_uint(const std::string& key, std::uint64_t fallback) const {
  const std::int64_t v = get_int(key, static_cast<std::int64_t>(fallback));
  if (v < 0) fail(ErrorCode::kParse, "field " + key + ": must be non-negative");
  return static_cast<std::uint64_t>(v);
}

std::string Config::get_string(const std::string& key, const std::string& fallback) const {
  return get(key).value_or(fallback);
}

}  // namespace mlcl
