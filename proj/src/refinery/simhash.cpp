#include "forge/refinery/simhash.hpp"

#include <array>

#include "forge/util/hash.hpp"

namespace forge::refinery {

SimHashSignature simhash64(std::span<const std::string> tokens) {
  std::array<std::int64_t, 64> acc{};
  for (const auto& t : tokens) {
    const std::uint64_t h = fnv1a64(std::string_view(t));
    for (int b = 0; b < 64; ++b) acc[b] += ((h >> b) & 1U) ? 1 : -1;
  }
  SimHashSignature sig;
  for (int b = 0; b < 64; ++b)
    if (acc[b] > 0) sig.bits |= std::uint64_t{1} << b;
  return sig;
}

}  // namespace forge::refinery
