#pragma once

#include <cstdint>
#include <span>
#include <unordered_map>
#include <vector>

#include "forge/corpus/record.hpp"
#include "forge/corpus/tokenize.hpp"
#include "forge/refinery/config.hpp"
#include "forge/refinery/report.hpp"
#include "forge/refinery/simhash.hpp"

namespace forge::refinery {

/// Kept-signature index with 4x16-bit band blocking. Any two signatures within
/// hamming distance 3 share at least one band; wider radii fall back to a scan.
class SignatureIndex {
 public:
  explicit SignatureIndex(int hamming_radius);

  /// Number of distinct kept signatures within the radius of `sig`, stopping
  /// once `limit` is exceeded. Sets `exact` if one of them is equal to `sig`.
  int count_conflicts(SimHashSignature sig, int limit, bool& exact) const;
  void insert(SimHashSignature sig);
  std::size_t size() const noexcept { return kept_.size(); }

 private:
  static constexpr int kBands = 4;
  int radius_;
  bool banded_;
  std::vector<SimHashSignature> kept_;
  std::unordered_map<std::uint16_t, std::vector<std::uint32_t>> bands_[kBands];
  mutable std::vector<std::uint32_t> stamp_;
  mutable std::uint32_t epoch_ = 0;
};

/// Forward pass in input order; returns the keep decision per signature.
/// A candidate is dropped if it equals a kept signature or conflicts with more
/// than `max_conflicts` distinct kept signatures.
std::vector<bool> dedup_signatures(std::span<const SimHashSignature> sigs, int hamming_radius,
                                   int max_conflicts);

/// Source tokens followed by target tokens, each side in its language's mode.
SimHashSignature record_signature(const corpus::ParallelRecord& r,
                                  const corpus::TokenizationTable& table);

/// Deduplicates each language pair independently; kept records stay in seq order.
std::vector<corpus::ParallelRecord> dedup(std::span<const corpus::ParallelRecord> records,
                                          const RefineryConfig& config, StageCount& count);

}  // namespace forge::refinery
