#include <chrono>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include <Eigen/Core>
#include <boost/version.hpp>
#include <openssl/evp.h>
#include <openssl/opensslv.h>

#include "CLI11.hpp"
#include "config.hpp"
#include "experiments.hpp"
#include "json.hpp"

#ifndef GFFPERC_VERSION
#define GFFPERC_VERSION "unknown"
#endif

namespace fs = std::filesystem;
using namespace gffperc::cli;

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitRuntime = 3;

std::string sha256_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  EVP_MD_CTX* ctx = EVP_MD_CTX_new();
  EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr);
  std::vector<char> buf(1 << 16);
  while (in) {
    in.read(buf.data(), static_cast<std::streamsize>(buf.size()));
    if (in.gcount() > 0) EVP_DigestUpdate(ctx, buf.data(), static_cast<std::size_t>(in.gcount()));
  }
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_DigestFinal_ex(ctx, digest, &len);
  EVP_MD_CTX_free(ctx);
  std::ostringstream hex;
  for (unsigned int i = 0; i < len; ++i)
    hex << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(digest[i]);
  return hex.str();
}

std::string utc_now() {
  const std::time_t now = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&now, &tm);
  std::ostringstream os;
  os << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return os.str();
}

void write_manifest(const fs::path& dir, const std::string& experiment, const Config& cfg,
                    int threads, const std::string& started, double wall,
                    const std::vector<std::string>& files) {
  nlohmann::ordered_json m;
  m["experiment"] = experiment;
  nlohmann::ordered_json conf = nlohmann::ordered_json::object();
  for (const auto& [k, v] : cfg.values) conf[k] = v;
  m["config"] = conf;
  m["threads"] = threads;
  m["started_utc"] = started;
  m["wall_time_s"] = wall;
  m["versions"] = {
      {"gffperc", GFFPERC_VERSION},
      {"compiler", __VERSION__},
      {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) +
                    "." + std::to_string(EIGEN_MINOR_VERSION)},
      {"boost", BOOST_LIB_VERSION},
      {"openssl", OPENSSL_VERSION_TEXT},
  };
  nlohmann::ordered_json list = nlohmann::ordered_json::array();
  for (const auto& f : files)
    list.push_back({{"path", f}, {"sha256", sha256_file(dir / f)},
                    {"bytes", static_cast<std::uint64_t>(fs::file_size(dir / f))}});
  m["files"] = list;
  std::ofstream out(dir / "manifest.json");
  out << m.dump(2) << "\n";
  if (!out) throw std::runtime_error("cannot write manifest");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Level-set percolation experiments for the zero-average GFF on regular graphs"};
  std::string experiment, config_path, out_dir = "out";
  std::optional<std::int64_t> seed, replicas;
  int threads = 1;
  bool validate_only = false;
  std::string names;
  for (const auto& n : experiment_names()) names += (names.empty() ? "" : ", ") + n;
  app.add_option("experiment", experiment, "One of: " + names)->required();
  app.add_option("--config", config_path, "Config file of 'key = value' lines")->required();
  app.add_option("--seed", seed, "Overrides the config seed");
  app.add_option("--out", out_dir, "Output directory");
  app.add_option("--replicas", replicas, "Overrides the config replica count");
  app.add_option("--threads", threads, "Worker threads")->check(CLI::PositiveNumber);
  app.add_flag("--validate", validate_only, "Check the config and exit");
  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfig;
  }

  if (!known_experiment(experiment)) {
    std::cerr << "error: unknown experiment '" << experiment << "' (expected one of: " << names
              << ")\n";
    return kExitConfig;
  }
  Config cfg;
  try {
    cfg = load_config(config_path);
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  }
  if (seed) cfg.set("seed", std::to_string(*seed));
  if (replicas) cfg.set("replicas", std::to_string(*replicas));

  const auto problems = validate(experiment, cfg);
  if (validate_only) {
    if (problems.empty()) std::cout << "ok\n";
    for (const auto& p : problems) std::cout << p << "\n";
    return problems.empty() ? 0 : kExitConfig;
  }
  if (!problems.empty()) {
    for (const auto& p : problems) std::cerr << "error: " << p << "\n";
    return kExitConfig;
  }
  cfg.values.erase("experiment");
  apply_defaults(experiment, cfg);

  const fs::path dir(out_dir);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !std::ofstream(dir / "manifest.json")) {
    std::cerr << "error: output path not writable: " << dir.string() << "\n";
    return kExitConfig;
  }

  const std::string started = utc_now();
  const auto t0 = std::chrono::steady_clock::now();
  try {
    auto files = run_experiment(experiment, cfg, {dir, threads});
    const double wall =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    write_manifest(dir, experiment, cfg, threads, started, wall, files);
    for (const auto& f : files) std::cout << (dir / f).string() << "\n";
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return 0;
}
