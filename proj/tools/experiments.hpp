#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "config.hpp"

namespace gffperc::cli {

struct RunOptions {
  std::filesystem::path out;
  int threads = 1;
};

/// Seed of replica i: stream_seed(master, replica, i).
std::uint64_t replica_seed(std::uint64_t master, long i);

/// Runs one experiment on a validated config with defaults applied.
/// Returns the emitted file names, relative to opt.out.
std::vector<std::string> run_experiment(const std::string& name, const Config& cfg,
                                        const RunOptions& opt);

}  // namespace gffperc::cli
