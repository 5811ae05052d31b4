#pragma once

#include <iosfwd>
#include <vector>

#include "forge/corpus/record.hpp"
#include "forge/refinery/config.hpp"
#include "forge/refinery/filters.hpp"
#include "forge/refinery/format.hpp"
#include "forge/refinery/report.hpp"
#include "forge/scorer/scorer.hpp"

namespace forge::refinery {

struct Scorers {
  scorer::Scorer& langid;
  scorer::Scorer& quality;
};

/// Records surviving each stage, for callers that need intermediate corpora.
struct PipelineTrace {
  std::vector<corpus::ParallelRecord> deduped, langid, quality;
};

/// clean -> prefilter -> dedup -> langid -> quality -> format. Writes formatted
/// samples as JSONL only after every stage succeeded.
RefineryReport run_pipeline(std::istream& input, std::ostream& output, Scorers scorers,
                            const DevLosses& dev, const RefineryConfig& config,
                            PipelineTrace* trace = nullptr);

/// Clean, prefilter and dedup only (no scorers).
std::vector<corpus::ParallelRecord> run_local_stages(std::vector<corpus::ParallelRecord> records,
                                                     const RefineryConfig& config,
                                                     RefineryReport& report);

}  // namespace forge::refinery
