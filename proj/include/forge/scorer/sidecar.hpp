#pragma once

#include <istream>
#include <string>
#include <unordered_map>

#include "forge/scorer/scorer.hpp"

namespace forge::scorer {

/// Replays precomputed scores keyed by request id.
class SidecarScorer : public Scorer {
 public:
  explicit SidecarScorer(std::istream& in);
  static SidecarScorer from_file(const std::string& path);

  std::vector<ScoreResponse> score(std::span<const ScoreRequest> requests) override;
  std::size_t size() const noexcept { return entries_.size(); }

 private:
  std::unordered_map<std::uint64_t, ScoreResponse> entries_;
};

}  // namespace forge::scorer
