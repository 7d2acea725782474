#include "config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

namespace gffperc::cli {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(trim(item));
  return out;
}

std::int64_t parse_int(const std::string& key, const std::string& text) {
  std::int64_t v = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || ptr != text.data() + text.size() || text.empty())
    throw ConfigError("key '" + key + "': expected an integer, got '" + text + "'");
  return v;
}

double parse_double(const std::string& key, const std::string& text) {
  if (text == "inf" || text == "+inf") return std::numeric_limits<double>::infinity();
  if (text == "-inf") return -std::numeric_limits<double>::infinity();
  double v = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || ptr != text.data() + text.size() || text.empty() || std::isnan(v))
    throw ConfigError("key '" + key + "': expected a number, got '" + text + "'");
  return v;
}

enum class Kind { integer, real, ints, reals, real_or_auto, text };

struct Key {
  std::string name;
  Kind kind;
  const char* fallback;  // nullptr: required
};

const std::map<std::string, std::vector<Key>>& schema() {
  static const std::map<std::string, std::vector<Key>> s = {
      {"green-validate",
       {{"n", Kind::integer, nullptr}, {"d", Kind::integer, nullptr},
        {"seed", Kind::integer, nullptr}}},
      {"sampler-validate",
       {{"n", Kind::integer, nullptr}, {"d", Kind::integer, nullptr},
        {"seed", Kind::integer, nullptr}, {"replicas", Kind::integer, nullptr},
        {"k_max", Kind::integer, "0"}, {"bias", Kind::real, "1e-3"}}},
      {"tree-eta",
       {{"d", Kind::integer, nullptr}, {"h", Kind::real, nullptr},
        {"depth", Kind::integer, nullptr}, {"replicas", Kind::integer, nullptr},
        {"seed", Kind::integer, nullptr}, {"p", Kind::real, "1"}, {"gamma", Kind::real, "-inf"}}},
      {"operator-sweep",
       {{"d", Kind::integer, nullptr}, {"p", Kind::real, "1"}, {"gamma", Kind::real, "-inf"},
        {"n_nodes", Kind::integer, "256"}, {"h_min", Kind::real, "-2"},
        {"h_max", Kind::real, "3"}, {"h_step", Kind::real, "0.25"}}},
      {"hstar",
       {{"d", Kind::integer, nullptr}, {"n_nodes", Kind::integer, "256"},
        {"tol", Kind::real, "1e-6"}}},
      {"coupling-tail",
       {{"n", Kind::integer, nullptr}, {"d", Kind::integer, nullptr},
        {"seed", Kind::integer, nullptr}, {"replicas", Kind::integer, nullptr},
        {"r", Kind::ints, "2,3,4"}, {"eps", Kind::reals, "2,3"}, {"k_max", Kind::integer, "0"}}},
      {"giant",
       {{"n", Kind::integer, nullptr}, {"d", Kind::integer, nullptr}, {"h", Kind::real, nullptr},
        {"seed", Kind::integer, nullptr}, {"replicas", Kind::integer, nullptr},
        {"k_max", Kind::integer, "0"}, {"eta_depth", Kind::integer, "20"},
        {"eta_replicas", Kind::integer, "10000"}}},
      {"mesoscopic",
       {{"n", Kind::integer, nullptr}, {"d", Kind::integer, nullptr}, {"h", Kind::real, nullptr},
        {"p", Kind::real, nullptr}, {"t", Kind::real, nullptr}, {"seed", Kind::integer, nullptr},
        {"replicas", Kind::integer, nullptr}, {"k_max", Kind::integer, "0"},
        {"K", Kind::real, "-inf"}, {"delta_prime", Kind::real, "0.05"},
        {"treelike_fraction", Kind::real, "0.9"}, {"eta_depth", Kind::integer, "20"},
        {"eta_replicas", Kind::integer, "20000"}}},
      {"sprinkle",
       {{"n", Kind::integer, nullptr}, {"d", Kind::integer, nullptr}, {"h", Kind::real, nullptr},
        {"h_prime", Kind::real, nullptr}, {"p", Kind::real, nullptr},
        {"seed", Kind::integer, nullptr}, {"replicas", Kind::integer, nullptr},
        {"t", Kind::real_or_auto, "auto"}, {"delta", Kind::real, "0.2"},
        {"delta_prime", Kind::real, "0.05"}, {"K0", Kind::real, "-1"},
        {"beta_prime", Kind::real, "0.1"}, {"treelike_fraction", Kind::real, "0.9"},
        {"k_max", Kind::integer, "0"}, {"eta_depth", Kind::integer, "20"},
        {"eta_replicas", Kind::integer, "20000"}}},
  };
  return s;
}

void check_kind(const Config& cfg, const Key& k) {
  switch (k.kind) {
    case Kind::integer: cfg.get_int(k.name); break;
    case Kind::real: cfg.get_double(k.name); break;
    case Kind::ints: cfg.get_ints(k.name); break;
    case Kind::reals: cfg.get_doubles(k.name); break;
    case Kind::real_or_auto:
      if (cfg.get_string(k.name) != "auto") cfg.get_double(k.name);
      break;
    case Kind::text: break;
  }
}

}  // namespace

std::string Config::get_string(const std::string& key) const {
  auto it = values.find(key);
  if (it == values.end()) throw ConfigError("missing key '" + key + "'");
  return it->second;
}

std::int64_t Config::get_int(const std::string& key) const {
  return parse_int(key, get_string(key));
}

std::uint64_t Config::get_seed(const std::string& key) const {
  const auto v = get_int(key);
  if (v < 0) throw ConfigError("key '" + key + "': seed must be nonnegative");
  return static_cast<std::uint64_t>(v);
}

double Config::get_double(const std::string& key) const {
  return parse_double(key, get_string(key));
}

std::vector<double> Config::get_doubles(const std::string& key) const {
  std::vector<double> out;
  for (const auto& item : split_list(get_string(key))) out.push_back(parse_double(key, item));
  if (out.empty()) throw ConfigError("key '" + key + "': empty list");
  return out;
}

std::vector<std::int64_t> Config::get_ints(const std::string& key) const {
  std::vector<std::int64_t> out;
  for (const auto& item : split_list(get_string(key))) out.push_back(parse_int(key, item));
  if (out.empty()) throw ConfigError("key '" + key + "': empty list");
  return out;
}

Config parse_config(std::istream& in) {
  Config cfg;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("line " + std::to_string(lineno) + ": expected 'key = value'");
    const std::string key = trim(line.substr(0, eq)), value = trim(line.substr(eq + 1));
    if (key.empty()) throw ConfigError("line " + std::to_string(lineno) + ": empty key");
    cfg.set(key, value);
  }
  return cfg;
}

Config load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file '" + path + "'");
  return parse_config(in);
}

const std::vector<std::string>& experiment_names() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> v;
    for (const auto& [name, keys] : schema()) v.push_back(name);
    return v;
  }();
  return names;
}

bool known_experiment(const std::string& name) { return schema().count(name) > 0; }

void apply_defaults(const std::string& experiment, Config& cfg) {
  for (const auto& k : schema().at(experiment))
    if (k.fallback && !cfg.has(k.name)) cfg.set(k.name, k.fallback);
}

std::vector<std::string> validate(const std::string& experiment, const Config& raw) {
  std::vector<std::string> problems;
  if (!known_experiment(experiment)) return {"unknown experiment '" + experiment + "'"};
  const auto& keys = schema().at(experiment);
  Config cfg = raw;
  if (cfg.has("experiment")) {
    if (cfg.get_string("experiment") != experiment)
      problems.push_back("config names experiment '" + cfg.get_string("experiment") + "'");
    cfg.values.erase("experiment");
  }
  for (const auto& [key, value] : cfg.values)
    if (std::none_of(keys.begin(), keys.end(), [&](const Key& k) { return k.name == key; }))
      problems.push_back("unknown key '" + key + "'");
  apply_defaults(experiment, cfg);
  bool typed = true;
  for (const auto& k : keys) {
    if (!cfg.has(k.name)) {
      problems.push_back("missing key '" + k.name + "'");
      typed = false;
      continue;
    }
    try {
      check_kind(cfg, k);
    } catch (const ConfigError& e) {
      problems.push_back(e.what());
      typed = false;
    }
  }
  if (!typed) return problems;

  auto has = [&](const char* k) { return cfg.has(k); };
  if (has("seed") && cfg.get_int("seed") < 0) problems.push_back("seed must be nonnegative");
  if (has("d") && cfg.get_int("d") < 3) problems.push_back("d must be at least 3");
  if (has("n") && has("d")) {
    const auto n = cfg.get_int("n"), d = cfg.get_int("d");
    if ((n * d) % 2 != 0) problems.push_back("parity");
    if (n < d + 1) problems.push_back("n must be at least d+1");
  }
  if (has("p")) {
    const double p = cfg.get_double("p");
    if (!(p >= 0.0 && p <= 1.0)) problems.push_back("p out of [0,1]");
    else if ((experiment == "sprinkle" || experiment == "mesoscopic") && !(p > 0.5))
      problems.push_back("p must exceed 1/2");
  }
  if (has("gamma") && cfg.get_double("gamma") > 0.0) problems.push_back("gamma must be <= 0");
  for (const char* k : {"replicas", "depth", "eta_depth", "eta_replicas"})
    if (has(k) && cfg.get_int(k) < 1) problems.push_back(std::string(k) + " must be positive");
  if (has("k_max") && cfg.get_int("k_max") < 0) problems.push_back("k_max must be nonnegative");
  if (has("n_nodes") && cfg.get_int("n_nodes") < 8) problems.push_back("n_nodes must be at least 8");
  if (has("tol") && !(cfg.get_double("tol") > 0.0)) problems.push_back("tol must be positive");
  if (has("t") && cfg.get_string("t") != "auto") {
    const double t = cfg.get_double("t");
    if (!(t >= 0.0 && t <= 1.0)) problems.push_back("t out of [0,1]");
  }
  if (has("h_step") && !(cfg.get_double("h_step") > 0.0)) problems.push_back("h_step must be positive");
  if (has("h_min") && has("h_max") && cfg.get_double("h_min") > cfg.get_double("h_max"))
    problems.push_back("h_min exceeds h_max");
  if (has("h_prime") && !(cfg.get_double("h") < cfg.get_double("h_prime")))
    problems.push_back("need h < h_prime");
  if (has("r"))
    for (auto r : cfg.get_ints("r"))
      if (r < 1) problems.push_back("r values must be positive");
  if (has("eps"))
    for (double e : cfg.get_doubles("eps"))
      if (!(e > 0.0)) problems.push_back("eps values must be positive");
  for (const char* k : {"delta", "delta_prime"})
    if (has(k) && !(cfg.get_double(k) > 0.0 && cfg.get_double(k) < 0.5))
      problems.push_back(std::string(k) + " out of (0,1/2)");
  if (has("treelike_fraction") &&
      !(cfg.get_double("treelike_fraction") > 0.0 && cfg.get_double("treelike_fraction") <= 1.0))
    problems.push_back("treelike_fraction out of (0,1]");
  if (has("bias") && !(cfg.get_double("bias") > 0.0)) problems.push_back("bias must be positive");
  return problems;
}

}  // namespace gffperc::cli
