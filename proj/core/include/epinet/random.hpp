#ifndef EPINET_RANDOM_HPP
#define EPINET_RANDOM_HPP

#include <cstdint>
#include <random>

namespace epinet {

using Rng = std::mt19937_64;

inline std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

// Seed of replica i: the (i+1)-th output of splitmix64 started at master.
inline std::uint64_t replica_seed(std::uint64_t master, std::uint64_t i) {
  std::uint64_t state = master + i * 0x9E3779B97F4A7C15ULL;
  return splitmix64(state);
}

inline double uniform01(Rng& rng) {
  return std::uniform_real_distribution<double>(0.0, 1.0)(rng);
}

// Strictly positive uniform, safe to take the logarithm of.
inline double uniform_open(Rng& rng) {
  double u;
  do {
    u = uniform01(rng);
  } while (u <= 0.0);
  return u;
}

inline double exponential(Rng& rng, double rate) {
  return std::exponential_distribution<double>(rate)(rng);
}

template <class Int>
Int uniform_index(Rng& rng, Int n) {
  return std::uniform_int_distribution<Int>(0, n - 1)(rng);
}

}  // namespace epinet

#endif  // EPINET_RANDOM_HPP
