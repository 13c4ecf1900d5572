#pragma once

#include <cstdint>

namespace subfit {

/// Derives an independent sub-stream seed from a base seed and a stream id
/// (splitmix64 finalizer). Chain calls to key a seed by several indices.
inline std::uint64_t mix_seed(std::uint64_t base, std::uint64_t stream) {
  std::uint64_t z = base + 0x9E3779B97F4A7C15ull * (stream + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

}  // namespace subfit
