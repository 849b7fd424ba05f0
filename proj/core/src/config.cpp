#include "vpl/config.hpp"

#include <algorithm>
#include <cctype>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <vector>

extern "C" char** environ;

namespace vpl {

namespace {

std::string trim(const std::string& s) {
  std::size_t a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  std::size_t b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  return s;
}

}  // namespace

Config Config::parse(const std::string& text, const std::string& filename) {
  Config cfg;
  std::istringstream is(text);
  std::string line, section;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    const std::size_t c = line.find_first_of("#;");
    if (c != std::string::npos) line.erase(c);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']')
        throw ConfigError(filename + ":" + std::to_string(lineno) +
                          ": unterminated section header '" + line + "'");
      section = lower(trim(line.substr(1, line.size() - 2)));
      if (section.empty())
        throw ConfigError(filename + ":" + std::to_string(lineno) +
                          ": empty section name");
      cfg.sections_[section];
      continue;
    }
    const std::size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError(filename + ":" + std::to_string(lineno) +
                        ": expected 'key = value', got '" + line + "'");
    const std::string key = lower(trim(line.substr(0, eq)));
    const std::string val = trim(line.substr(eq + 1));
    if (key.empty())
      throw ConfigError(filename + ":" + std::to_string(lineno) +
                        ": empty key");
    if (section.empty())
      throw ConfigError(filename + ":" + std::to_string(lineno) +
                        ": key '" + key + "' outside any [section]");
    cfg.sections_[section][key] = val;
  }
  return cfg;
}

Config Config::parse_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot open config file '" + path + "'");
  std::stringstream ss;
  ss << is.rdbuf();
  return parse(ss.str(), path);
}

void Config::apply_env_overrides(char** envp) {
  if (!envp) envp = environ;
  for (char** e = envp; e && *e; ++e) {
    std::string entry(*e);
    if (entry.rfind("VPL_", 0) != 0) continue;
    const std::size_t eq = entry.find('=');
    if (eq == std::string::npos) continue;
    const std::string name = entry.substr(4, eq - 4);
    const std::size_t us = name.find('_');
    if (us == std::string::npos) continue;
    set(lower(name.substr(0, us)), lower(name.substr(us + 1)),
        entry.substr(eq + 1));
  }
}

bool Config::has(const std::string& section, const std::string& key) const {
  auto s = sections_.find(lower(section));
  return s != sections_.end() && s->second.count(lower(key)) > 0;
}

std::string Config::require(const std::string& section,
                            const std::string& key) const {
  return sections_.at(lower(section)).at(lower(key));
}

std::string Config::get_string(const std::string& section,
                               const std::string& key,
                               const std::string& fallback) const {
  return has(section, key) ? require(section, key) : fallback;
}

double Config::get_double(const std::string& section, const std::string& key,
                          double fallback) const {
  if (!has(section, key)) return fallback;
  const std::string v = require(section, key);
  std::size_t pos = 0;
  double out = 0;
  try {
    out = std::stod(v, &pos);
  } catch (const std::exception&) {
    pos = 0;
  }
  if (pos != v.size())
    throw ConfigError("key '" + lower(section) + "." + lower(key) +
                      "': expected a number, got '" + v + "'");
  return out;
}

long Config::get_long(const std::string& section, const std::string& key,
                      long fallback) const {
  if (!has(section, key)) return fallback;
  const std::string v = require(section, key);
  std::size_t pos = 0;
  long out = 0;
  try {
    out = std::stol(v, &pos);
  } catch (const std::exception&) {
    pos = 0;
  }
  if (pos != v.size())
    throw ConfigError("key '" + lower(section) + "." + lower(key) +
                      "': expected an integer, got '" + v + "'");
  return out;
}

bool Config::get_bool(const std::string& section, const std::string& key,
                      bool fallback) const {
  if (!has(section, key)) return fallback;
  const std::string v = lower(require(section, key));
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  throw ConfigError("key '" + lower(section) + "." + lower(key) +
                    "': expected a boolean, got '" + v + "'");
}

std::vector<double> Config::get_list(const std::string& section,
                                     const std::string& key,
                                     const std::vector<double>& fallback) const {
  if (!has(section, key)) return fallback;
  const std::string v = require(section, key);
  std::vector<double> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (item.empty()) continue;
    std::size_t pos = 0;
    double x = 0;
    try {
      x = std::stod(item, &pos);
    } catch (const std::exception&) {
      pos = 0;
    }
    if (pos != item.size())
      throw ConfigError("key '" + lower(section) + "." + lower(key) +
                        "': bad list element '" + item + "'");
    out.push_back(x);
  }
  return out;
}

void Config::set(const std::string& section, const std::string& key,
                 const std::string& value) {
  sections_[lower(section)][lower(key)] = value;
}

std::string Config::canonical() const {
  std::string out;
  for (const auto& [sec, kv] : sections_) {
    out += "[" + sec + "]\n";
    for (const auto& [k, v] : kv) out += k + " = " + v + "\n";
  }
  return out;
}

std::string Config::hash() const {
  // FNV-1a, 64-bit
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : canonical()) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace vpl
