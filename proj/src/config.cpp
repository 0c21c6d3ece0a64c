#include "curvspin/config.hpp"

#include <cctype>
#include <cerrno>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

namespace curvspin {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

bool valid_name(const std::string& s) {
  if (s.empty()) return false;
  for (char c : s)
    if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-' || c == '.')) return false;
  return true;
}

}  // namespace

Config Config::parse(const std::string& text) {
  Config cfg;
  std::istringstream in(text);
  std::string raw, section;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    std::string line = raw;
    const auto hash = line.find_first_of("#;");
    if (hash != std::string::npos) line = line.substr(0, hash);
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos) continue;
    const int col0 = static_cast<int>(first) + 1;
    if (line[first] == '[') {
      const auto close = line.find(']', first);
      if (close == std::string::npos)
        throw ConfigError("unterminated section header", line_no, col0);
      section = trim(line.substr(first + 1, close - first - 1));
      if (!valid_name(section)) throw ConfigError("invalid section name '" + section + "'", line_no, col0 + 1);
      if (!trim(line.substr(close + 1)).empty())
        throw ConfigError("unexpected text after section header", line_no, static_cast<int>(close) + 2);
      cfg.data_[section];
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("expected key = value", line_no, col0, trim(line));
    const std::string key = trim(line.substr(0, eq));
    if (!valid_name(key)) throw ConfigError("invalid key '" + key + "'", line_no, col0, key);
    const std::string value = trim(line.substr(eq + 1));
    const auto vpos = line.find_first_not_of(" \t", eq + 1);
    Entry e{value, line_no, vpos == std::string::npos ? static_cast<int>(eq) + 2 : static_cast<int>(vpos) + 1, col0};
    if (value.empty()) throw ConfigError("empty value for key '" + key + "'", line_no, e.column, key);
    auto& sec = cfg.data_[section];
    if (sec.count(key))
      throw ConfigError("duplicate key '" + key + "'", line_no, col0, key);
    sec[key] = e;
  }
  return cfg;
}

Config Config::load(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError("cannot open config file '" + path + "'", 0, 0);
  std::ostringstream ss;
  ss << f.rdbuf();
  return parse(ss.str());
}

const Config::Entry* Config::find(const std::string& section, const std::string& key) const {
  const auto s = data_.find(section);
  if (s == data_.end()) return nullptr;
  const auto k = s->second.find(key);
  return k == s->second.end() ? nullptr : &k->second;
}

bool Config::has(const std::string& section, const std::string& key) const {
  return find(section, key) != nullptr;
}

void Config::bad_value(const std::string& section, const std::string& key,
                       const std::string& expected) const {
  const Entry* e = find(section, key);
  const std::string name = section.empty() ? key : section + "." + key;
  throw ConfigError("key '" + name + "' expects " + expected + ", got '" + (e ? e->value : "") + "'",
                    e ? e->line : 0, e ? e->column : 0, name);
}

std::string Config::get_string(const std::string& section, const std::string& key,
                               const std::string& fallback) const {
  const Entry* e = find(section, key);
  return e ? e->value : fallback;
}

double Config::get_double(const std::string& section, const std::string& key, double fallback) const {
  const Entry* e = find(section, key);
  if (!e) return fallback;
  errno = 0;
  char* end = nullptr;
  const double v = std::strtod(e->value.c_str(), &end);
  if (end == e->value.c_str() || *end != '\0' || errno == ERANGE) bad_value(section, key, "a number");
  return v;
}

std::optional<double> Config::get_optional_double(const std::string& section,
                                                  const std::string& key) const {
  if (!has(section, key)) return std::nullopt;
  return get_double(section, key, 0.0);
}

int Config::get_int(const std::string& section, const std::string& key, int fallback) const {
  const Entry* e = find(section, key);
  if (!e) return fallback;
  errno = 0;
  char* end = nullptr;
  const long v = std::strtol(e->value.c_str(), &end, 10);
  if (end == e->value.c_str() || *end != '\0' || errno == ERANGE || v < -2147483647L || v > 2147483647L)
    bad_value(section, key, "an integer");
  return static_cast<int>(v);
}

bool Config::get_bool(const std::string& section, const std::string& key, bool fallback) const {
  const Entry* e = find(section, key);
  if (!e) return fallback;
  const std::string& v = e->value;
  if (v == "true" || v == "yes" || v == "on" || v == "1") return true;
  if (v == "false" || v == "no" || v == "off" || v == "0") return false;
  bad_value(section, key, "a boolean");
}

void Config::set(const std::string& section, const std::string& key, const std::string& value) {
  data_[section][key] = Entry{value, 0, 0, 0};
}

void Config::validate(const std::map<std::string, std::set<std::string>>& allowed) const {
  for (const auto& [section, keys] : data_) {
    const auto a = allowed.find(section);
    for (const auto& [key, e] : keys) {
      const std::string name = section.empty() ? key : section + "." + key;
      if (a == allowed.end())
        throw ConfigError("unknown section '" + section + "' (key '" + name + "')", e.line, e.key_column, name);
      if (!a->second.count(key))
        throw ConfigError("unknown key '" + name + "'", e.line, e.key_column, name);
    }
  }
}

std::string Config::canonical() const {
  std::string out;
  for (const auto& [section, keys] : data_)
    for (const auto& [key, e] : keys) out += (section.empty() ? "" : section + ".") + key + "=" + e.value + "\n";
  return out;
}

std::uint64_t fnv1a(const std::string& text) {
  std::uint64_t h = 14695981039346656037ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

std::string hex64(std::uint64_t v) {
  char buf[19];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

}  // namespace curvspin
