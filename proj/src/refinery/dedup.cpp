#include "forge/refinery/dedup.hpp"

#include <map>

namespace forge::refinery {

SignatureIndex::SignatureIndex(int hamming_radius)
    : radius_(hamming_radius), banded_(hamming_radius < kBands) {}

int SignatureIndex::count_conflicts(SimHashSignature sig, int limit, bool& exact) const {
  exact = false;
  int count = 0;
  if (!banded_) {
    for (const auto& k : kept_) {
      const int d = hamming(k, sig);
      if (d == 0) exact = true;
      if (d <= radius_ && ++count > limit) break;
    }
    return count;
  }
  if (++epoch_ == 0) {
    std::fill(stamp_.begin(), stamp_.end(), 0);
    epoch_ = 1;
  }
  for (int b = 0; b < kBands; ++b) {
    const auto key = static_cast<std::uint16_t>(sig.bits >> (16 * b));
    auto it = bands_[b].find(key);
    if (it == bands_[b].end()) continue;
    for (std::uint32_t idx : it->second) {
      if (stamp_[idx] == epoch_) continue;
      stamp_[idx] = epoch_;
      const int d = hamming(kept_[idx], sig);
      if (d == 0) {
        exact = true;
        return count + 1;
      }
      if (d <= radius_ && ++count > limit) return count;
    }
  }
  return count;
}

void SignatureIndex::insert(SimHashSignature sig) {
  const auto idx = static_cast<std::uint32_t>(kept_.size());
  kept_.push_back(sig);
  if (!banded_) return;
  stamp_.push_back(0);
  for (int b = 0; b < kBands; ++b)
    bands_[b][static_cast<std::uint16_t>(sig.bits >> (16 * b))].push_back(idx);
}

std::vector<bool> dedup_signatures(std::span<const SimHashSignature> sigs, int hamming_radius,
                                   int max_conflicts) {
  SignatureIndex index(hamming_radius);
  std::vector<bool> keep(sigs.size(), false);
  for (std::size_t i = 0; i < sigs.size(); ++i) {
    bool exact = false;
    const int conflicts = index.count_conflicts(sigs[i], max_conflicts, exact);
    if (exact || conflicts > max_conflicts) continue;
    keep[i] = true;
    index.insert(sigs[i]);
  }
  return keep;
}

SimHashSignature record_signature(const corpus::ParallelRecord& r,
                                  const corpus::TokenizationTable& table) {
  auto tokens = corpus::tokenize(r.src_line, table.mode(r.src));
  auto tgt = corpus::tokenize(r.tgt_line, table.mode(r.trg));
  tokens.insert(tokens.end(), std::make_move_iterator(tgt.begin()),
                std::make_move_iterator(tgt.end()));
  return simhash64(tokens);
}

std::vector<corpus::ParallelRecord> dedup(std::span<const corpus::ParallelRecord> records,
                                          const RefineryConfig& config, StageCount& count) {
  const corpus::TokenizationTable table(config.per_character_langs);
  std::map<corpus::LangPair, std::vector<std::size_t>> groups;
  for (std::size_t i = 0; i < records.size(); ++i) groups[corpus::pair_of(records[i])].push_back(i);

  std::vector<bool> keep(records.size(), false);
  for (const auto& [pair, members] : groups) {
    std::vector<SimHashSignature> sigs;
    sigs.reserve(members.size());
    for (std::size_t i : members) sigs.push_back(record_signature(records[i], table));
    const auto decision = dedup_signatures(sigs, config.hamming_radius, config.max_conflicts);
    for (std::size_t j = 0; j < members.size(); ++j) keep[members[j]] = decision[j];
  }

  std::vector<corpus::ParallelRecord> out;
  for (std::size_t i = 0; i < records.size(); ++i) {
    if (keep[i]) {
      out.push_back(records[i]);
      ++count.kept;
    } else {
      ++count.dropped;
    }
  }
  return out;
}

}  // namespace forge::refinery
