#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

namespace curvspin {

/// Parse or validation failure with the offending position and key.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(const std::string& what, int line, int column, std::string key = {})
      : std::runtime_error(what), line(line), column(column), key(std::move(key)) {}
  int line;
  int column;
  std::string key;
};

/// Plain-text key=value configuration with [section] headers. Keys before the
/// first header live in the "" section. '#' and ';' start comments.
class Config {
 public:
  struct Entry {
    std::string value;
    int line = 0;
    int column = 0;  ///< column of the value
    int key_column = 0;
  };

  static Config parse(const std::string& text);
  static Config load(const std::string& path);

  bool has(const std::string& section, const std::string& key) const;
  const Entry* find(const std::string& section, const std::string& key) const;

  std::string get_string(const std::string& section, const std::string& key,
                         const std::string& fallback) const;
  double get_double(const std::string& section, const std::string& key, double fallback) const;
  int get_int(const std::string& section, const std::string& key, int fallback) const;
  bool get_bool(const std::string& section, const std::string& key, bool fallback) const;
  std::optional<double> get_optional_double(const std::string& section, const std::string& key) const;

  void set(const std::string& section, const std::string& key, const std::string& value);

  /// Throws ConfigError on the first key not listed for its section.
  void validate(const std::map<std::string, std::set<std::string>>& allowed) const;

  /// Canonical "section.key=value" lines, sorted.
  std::string canonical() const;
  const std::map<std::string, std::map<std::string, Entry>>& sections() const { return data_; }

 private:
  [[noreturn]] void bad_value(const std::string& section, const std::string& key,
                              const std::string& expected) const;
  std::map<std::string, std::map<std::string, Entry>> data_;
};

/// 64-bit FNV-1a.
std::uint64_t fnv1a(const std::string& text);
std::string hex64(std::uint64_t v);

}  // namespace curvspin
