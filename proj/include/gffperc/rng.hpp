#pragma once

#include <cstdint>

#include <boost/random/mersenne_twister.hpp>
#include <boost/random/normal_distribution.hpp>
#include <boost/random/uniform_01.hpp>
#include <boost/random/uniform_int_distribution.hpp>

namespace gffperc {

using Engine = boost::random::mt19937_64;

/// Stream tags. Every random quantity in the library is drawn from an engine
/// keyed by (master seed, tag, index), so replicas never share a stream and
/// results do not depend on how replicas are scheduled across threads.
enum class Stream : std::uint64_t {
  graph = 1,
  z_layers = 2,
  split = 3,
  bar_z2 = 4,
  tree = 5,
  marks = 6,
  prune = 7,
  coupling = 8,
  exact = 9,
  replica = 10,
  subsets = 11,
};

/// SplitMix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Splitting rule: seed = mix(mix(mix(master) ^ tag) ^ index).
constexpr std::uint64_t stream_seed(std::uint64_t master, Stream tag,
                                    std::uint64_t index = 0) {
  return mix64(mix64(mix64(master) ^ static_cast<std::uint64_t>(tag)) ^ index);
}

inline Engine make_engine(std::uint64_t master, Stream tag,
                          std::uint64_t index = 0) {
  return Engine(stream_seed(master, tag, index));
}

/// Standard normal draws on top of an owned engine (Boost's ziggurat, which
/// is fully specified and therefore reproducible across platforms).
class NormalSource {
 public:
  explicit NormalSource(Engine engine) : engine_(engine) {}
  NormalSource(std::uint64_t master, Stream tag, std::uint64_t index = 0)
      : engine_(make_engine(master, tag, index)) {}

  double operator()() { return normal_(engine_); }
  double operator()(double sd) { return sd * normal_(engine_); }
  double uniform() { return uniform_(engine_); }
  Engine& engine() { return engine_; }

 private:
  Engine engine_;
  boost::random::normal_distribution<double> normal_;
  boost::random::uniform_01<double> uniform_;
};

}  // namespace gffperc
