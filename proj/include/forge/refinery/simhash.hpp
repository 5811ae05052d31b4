#pragma once

#include <bit>
#include <cstdint>
#include <span>
#include <string>

namespace forge::refinery {

struct SimHashSignature {
  std::uint64_t bits = 0;
  auto operator<=>(const SimHashSignature&) const = default;
};

/// Classic 64-bit SimHash with FNV-1a 64 token hashes. Accumulator ties and the
/// empty list both yield 0 bits.
SimHashSignature simhash64(std::span<const std::string> tokens);

inline int hamming(SimHashSignature a, SimHashSignature b) noexcept {
  return std::popcount(a.bits ^ b.bits);
}

}  // namespace forge::refinery
