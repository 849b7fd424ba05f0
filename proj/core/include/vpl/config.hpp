#pragma once
// Sectioned key/value run configuration: parse, environment overrides
// (VPL_SECTION_KEY), canonical echo, and a stable content hash.

#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace vpl {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

class Config {
 public:
  Config() = default;

  // Parses "[section]\nkey = value" text; '#' and ';' start comments.
  // Errors name the file, line, and offending text.
  static Config parse(const std::string& text,
                      const std::string& filename = "<string>");
  static Config parse_file(const std::string& path);

  // Applies VPL_SECTION_KEY environment variables on top.
  void apply_env_overrides(char** envp = nullptr);

  bool has(const std::string& section, const std::string& key) const;
  std::string get_string(const std::string& section, const std::string& key,
                         const std::string& fallback) const;
  double get_double(const std::string& section, const std::string& key,
                    double fallback) const;
  long get_long(const std::string& section, const std::string& key,
                long fallback) const;
  bool get_bool(const std::string& section, const std::string& key,
                bool fallback) const;
  // List of doubles, comma separated.
  std::vector<double> get_list(const std::string& section,
                               const std::string& key,
                               const std::vector<double>& fallback) const;

  void set(const std::string& section, const std::string& key,
           const std::string& value);

  // Canonical serialization (sorted sections and keys) and its FNV-1a hash.
  std::string canonical() const;
  std::string hash() const;

  const std::map<std::string, std::map<std::string, std::string>>& sections()
      const {
    return sections_;
  }

 private:
  std::string require(const std::string& section, const std::string& key) const;
  std::map<std::string, std::map<std::string, std::string>> sections_;
};

}  // namespace vpl
