#pragma once

#include <cstdint>
#include <iosfwd>
#include <set>
#include <string>
#include <vector>

namespace forge::refinery {

struct RefineryConfig {
  int min_tokens = 2;
  double min_len_ratio = 0.3;
  int simhash_bits = 64;
  int hamming_radius = 3;
  int max_conflicts = 2;
  double quality_percentile = 0.90;
  double langid_min_prob = 0.5;
  std::uint64_t template_seed = 0;
  bool strict = false;
  /// Languages tokenized per grapheme cluster.
  std::set<std::string> per_character_langs{"zh", "ja", "th"};
  /// Empty means the built-in pool.
  std::vector<std::string> templates;

  /// Throws UsageError when an invariant is violated.
  void validate() const;
};

/// Keys mirror the field names; absent keys keep their defaults.
RefineryConfig load_refinery_config(std::istream& in);
RefineryConfig load_refinery_config_file(const std::string& path);

}  // namespace forge::refinery
