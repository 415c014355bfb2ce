#pragma once

#include <cstdint>
#include <random>

namespace lqc {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Stable per-trial seed derivation: independent of execution order.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index,
                                 std::uint64_t stream = 0) {
  return splitmix64(splitmix64(master ^ splitmix64(index)) ^ splitmix64(stream ^ 0xabcdef12345ULL));
}

}  // namespace lqc
