#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace qsceom {

class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct ConfigKey {
  std::string name;
  std::string default_value;
  std::string help;
  /// Keys that do not influence any result (output location, thread count)
  /// are left out of the config hash.
  bool hashed = true;
};

/// Registry of every accepted key with its default.
const std::vector<ConfigKey>& config_schema();

/// Line-oriented key=value configuration with dotted section keys. Unknown
/// keys are rejected; unset keys resolve to their schema default.
class ExperimentConfig {
 public:
  ExperimentConfig();

  static ExperimentConfig parse(std::istream& in, const std::string& source = "<config>");
  static ExperimentConfig load(const std::filesystem::path& path);

  /// Overrides one key; throws ConfigError for unknown keys.
  void set(const std::string& key, const std::string& value);
  /// Parses "key=value".
  void set_assignment(const std::string& assignment);

  const std::string& get(const std::string& key) const;
  double get_double(const std::string& key) const;
  std::int64_t get_int(const std::string& key) const;
  std::uint64_t get_uint(const std::string& key) const;
  /// on|off|true|false|1|0
  bool get_bool(const std::string& key) const;
  /// Comma-separated list with surrounding spaces trimmed; empty items dropped.
  std::vector<std::string> get_list(const std::string& key) const;
  std::vector<double> get_double_list(const std::string& key) const;

  /// Every key in schema order as "key = value" lines.
  std::string resolved_text() const;
  /// FNV-1a 64 over the hashed keys of resolved_text, as 16 hex digits.
  std::string hash() const;
  void write_resolved(const std::filesystem::path& path) const;

  std::uint64_t master_seed() const { return get_uint("seed"); }
  std::filesystem::path output_dir() const { return get("output.dir"); }
  int threads() const;

 private:
  std::map<std::string, std::string> values_;
};

std::string trim(std::string_view text);
std::vector<std::string> split_list(std::string_view text, char sep = ',');

}  // namespace qsceom
