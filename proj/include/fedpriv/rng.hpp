#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

#include <boost/random/chi_squared_distribution.hpp>
#include <boost/random/normal_distribution.hpp>

namespace fedpriv {

using Engine = std::mt19937_64;

// Stream tags keep substreams for different purposes disjoint.
enum class Stream : std::uint64_t {
  data = 0x64617461,
  noise = 0x6e6f6973,
  shared = 0x73686172,
  calibration = 0x63616c69,
  null_reps = 0x6e756c6c,
  alt_reps = 0x616c7472,
  audit = 0x61756469,
  prior = 0x7072696f,
};

constexpr std::uint64_t splitmix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Counter-based split: the child seed depends only on the parent seed and the
// path, never on how many draws other streams made.
constexpr std::uint64_t derive_seed(std::uint64_t parent,
                                    std::initializer_list<std::uint64_t> path) {
  std::uint64_t h = splitmix64(parent ^ 0x6a09e667f3bcc909ULL);
  std::uint64_t i = 1;
  for (std::uint64_t x : path) {
    h = splitmix64(h ^ splitmix64(x + 0x9e3779b97f4a7c15ULL * i));
    ++i;
  }
  return h;
}

constexpr std::uint64_t tag(Stream s) { return static_cast<std::uint64_t>(s); }

inline Engine make_engine(std::uint64_t seed) { return Engine(seed); }

inline Engine make_engine(std::uint64_t parent,
                          std::initializer_list<std::uint64_t> path) {
  return Engine(derive_seed(parent, path));
}

// Boost's ziggurat sampler is deterministic across platforms given the engine,
// unlike std::normal_distribution whose algorithm is implementation-defined.
inline double standard_normal(Engine& eng) {
  boost::random::normal_distribution<double> z;
  return z(eng);
}

inline double chi_squared(Engine& eng, double dof) {
  boost::random::chi_squared_distribution<double> chi(dof);
  return chi(eng);
}

}  // namespace fedpriv
