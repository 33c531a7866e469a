#pragma once

#include <cstdint>
#include <random>

#include "hashmem/pe.hpp"

namespace hashmem::detail {

/// Unbiased draw from [0, n) using only raw engine output, so sequences are
/// identical across standard libraries (std::uniform_int_distribution is not).
inline std::uint64_t uniform_below(std::mt19937_64& rng, std::uint64_t n) {
  if (n <= 1) return 0;
  const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % n);
  std::uint64_t x = rng();
  while (x >= limit) x = rng();
  return x % n;
}

/// Uniform 32-bit key that is never one of the slot sentinels.
inline Key random_key(std::mt19937_64& rng) {
  Key k = static_cast<Key>(rng() >> 32);
  while (is_sentinel(k)) k = static_cast<Key>(rng() >> 32);
  return k;
}

}  // namespace hashmem::detail
