#pragma once

#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "forge/corpus/record.hpp"
#include "forge/corpus/tokenize.hpp"
#include "forge/refinery/config.hpp"
#include "forge/refinery/report.hpp"
#include "forge/scorer/scorer.hpp"

namespace forge::refinery {

enum class DropReason {
  None,
  TooShort,
  LengthMismatch,
  Duplicate,
  LangMismatch,
  LowConfidence,
  LowQuality,
};

const char* to_string(DropReason reason) noexcept;

class EmptyDevSet : public Error {
 public:
  EmptyDevSet() : Error("quality threshold needs at least one dev loss") {}
};

/// Length rule on already-tokenized sides.
DropReason prefilter_counts(std::size_t src_tokens, std::size_t tgt_tokens,
                            const RefineryConfig& config) noexcept;

DropReason prefilter(const corpus::ParallelRecord& record, const RefineryConfig& config,
                     const corpus::TokenizationTable& table);

/// Language-ID request ids: 2*seq for the source line, 2*seq+1 for the target.
inline std::uint64_t langid_src_id(std::uint64_t seq) { return 2 * seq; }
inline std::uint64_t langid_tgt_id(std::uint64_t seq) { return 2 * seq + 1; }

DropReason langid_decision(const corpus::ParallelRecord& record, const scorer::ScoreResponse& src,
                           const scorer::ScoreResponse& tgt, double min_prob);

std::vector<corpus::ParallelRecord> langid_filter(std::span<const corpus::ParallelRecord> records,
                                                  scorer::Scorer& scorer,
                                                  const RefineryConfig& config, StageCount& count,
                                                  std::map<std::string, std::size_t>* reasons = nullptr);

/// Nearest-rank percentile: sorted[ceil(p*N) - 1].
double quality_threshold(std::span<const double> dev_losses, double percentile);

/// Dev losses grouped by language pair.
using DevLosses = std::map<corpus::LangPair, std::vector<double>>;

/// JSONL, one `{"src":..,"trg":..,"loss":X}` per line.
DevLosses read_dev_losses(std::istream& in);

/// Threshold per pair present in `pairs`. A pair without dev losses uses the
/// pooled dev set; an empty dev set throws EmptyDevSet.
std::map<corpus::LangPair, double> quality_thresholds(const DevLosses& dev,
                                                      std::span<const corpus::LangPair> pairs,
                                                      double percentile);

/// Keeps records whose conditional loss is <= the pair's threshold.
std::vector<corpus::ParallelRecord> quality_filter(
    std::span<const corpus::ParallelRecord> records, scorer::Scorer& scorer,
    const std::map<corpus::LangPair, double>& thresholds, StageCount& count);

std::string pair_key(const corpus::LangPair& pair);

}  // namespace forge::refinery
