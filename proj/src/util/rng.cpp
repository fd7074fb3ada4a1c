#include "adhominem/util/rng.hpp"

#include <limits>

#include "adhominem/util/hash.hpp"

namespace adhominem::util {

std::uint64_t Rng::index(std::uint64_t n) {
  // Rejection sampling removes modulo bias.
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() - std::numeric_limits<std::uint64_t>::max() % n;
  std::uint64_t x = 0;
  do {
    x = engine_();
  } while (x >= limit);
  return x % n;
}

double Rng::unit() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t tag) { return splitmix64(splitmix64(base) ^ tag); }

}  // namespace adhominem::util
