#pragma once

#include <cstddef>
#include <map>
#include <string>

namespace forge::refinery {

struct StageCount {
  std::size_t kept = 0;
  std::size_t dropped = 0;
  bool operator==(const StageCount&) const = default;
};

struct RefineryReport {
  std::size_t input = 0;  // records parsed from the input stream
  std::size_t malformed = 0;
  StageCount clean, prefilter, dedup, langid, quality, format;
  /// Drop counts keyed by reason name (TooShort, LengthMismatch, ...).
  std::map<std::string, std::size_t> drop_reasons;
  /// Quality threshold per language pair, keyed "src-trg".
  std::map<std::string, double> quality_threshold;

  bool operator==(const RefineryReport&) const = default;

  /// kept + dropped of every stage equals kept of the stage before it.
  bool accounting_holds() const noexcept;
  std::string to_json() const;
};

}  // namespace forge::refinery
