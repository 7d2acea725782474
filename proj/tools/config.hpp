#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace gffperc::cli {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// "key = value" lines; '#' starts a comment. Later lines override earlier ones.
struct Config {
  std::map<std::string, std::string> values;

  bool has(const std::string& key) const { return values.count(key) > 0; }
  void set(const std::string& key, const std::string& value) { values[key] = value; }

  std::string get_string(const std::string& key) const;
  std::int64_t get_int(const std::string& key) const;
  std::uint64_t get_seed(const std::string& key) const;
  /// Accepts "inf", "-inf".
  double get_double(const std::string& key) const;
  /// Comma-separated list.
  std::vector<double> get_doubles(const std::string& key) const;
  std::vector<std::int64_t> get_ints(const std::string& key) const;
};

Config parse_config(std::istream& in);
Config load_config(const std::string& path);

const std::vector<std::string>& experiment_names();
bool known_experiment(const std::string& name);

/// Fills optional keys with their defaults.
void apply_defaults(const std::string& experiment, Config& cfg);

/// Schema and range problems; empty when the config can be run.
std::vector<std::string> validate(const std::string& experiment, const Config& cfg);

}  // namespace gffperc::cli
