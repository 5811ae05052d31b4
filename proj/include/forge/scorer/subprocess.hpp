#pragma once

#include <chrono>
#include <string>
#include <sys/types.h>

#include "forge/scorer/scorer.hpp"

namespace forge::scorer {

struct SubprocessOptions {
  std::chrono::milliseconds timeout{60'000};
  std::size_t max_in_flight = 256;
};

/// Runs `command` through /bin/sh and speaks the line-delimited JSON protocol
/// over its stdio. Responses may arrive in any order; they are matched by id.
class SubprocessScorer : public Scorer {
 public:
  explicit SubprocessScorer(const std::string& command, SubprocessOptions options = {});
  ~SubprocessScorer() override;
  SubprocessScorer(const SubprocessScorer&) = delete;
  SubprocessScorer& operator=(const SubprocessScorer&) = delete;
  SubprocessScorer(SubprocessScorer&& other) noexcept;
  SubprocessScorer& operator=(SubprocessScorer&&) = delete;

  std::vector<ScoreResponse> score(std::span<const ScoreRequest> requests) override;

 private:
  void shutdown() noexcept;

  SubprocessOptions options_;
  pid_t pid_ = -1;
  int to_child_ = -1;
  int from_child_ = -1;
  std::string buffer_;
};

/// A sidecar when `spec` names an existing non-executable regular file,
/// otherwise a shell command.
std::unique_ptr<Scorer> open_scorer(const std::string& spec, SubprocessOptions options = {});

}  // namespace forge::scorer
