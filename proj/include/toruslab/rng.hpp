// Seeding helpers: every sample block gets its own generator so results do not depend
// on how blocks are distributed across threads.
#pragma once

#include <cstdint>
#include <random>

namespace toruslab {

inline constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::mt19937_64 block_rng(std::uint64_t seed, std::uint64_t block, std::uint64_t stream = 0) {
  return std::mt19937_64(splitmix64(splitmix64(seed ^ splitmix64(stream)) + block));
}

inline constexpr int kBlockSize = 1024;

}  // namespace toruslab
