#pragma once

#include <chrono>
#include <cstdint>
#include <iosfwd>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "forge/util/error.hpp"

namespace forge::scorer {

class ScorerFailure : public Error {
 public:
  using Error::Error;
};
class SpawnFailure : public ScorerFailure {
 public:
  using ScorerFailure::ScorerFailure;
};
class ProtocolViolation : public ScorerFailure {
 public:
  ProtocolViolation(const std::string& line, const std::string& why);
  const std::string& line() const noexcept { return line_; }

 private:
  std::string line_;
};
class Timeout : public ScorerFailure {
 public:
  explicit Timeout(std::uint64_t id);
  std::uint64_t id() const noexcept { return id_; }

 private:
  std::uint64_t id_;
};
class MissingScore : public ScorerFailure {
 public:
  explicit MissingScore(std::uint64_t id);
  std::uint64_t id() const noexcept { return id_; }

 private:
  std::uint64_t id_;
};
class ParseError : public ScorerFailure {
 public:
  ParseError(std::size_t line_no, const std::string& why);
  std::size_t line_no() const noexcept { return line_no_; }

 private:
  std::size_t line_no_;
};

enum class ScoreKind { LangId, Quality };

struct ScoreRequest {
  std::uint64_t id = 0;
  ScoreKind kind = ScoreKind::LangId;
  std::string text;  // LangId
  std::string src, trg, src_line, tgt_line;  // Quality

  static ScoreRequest langid(std::uint64_t id, std::string text);
  static ScoreRequest quality(std::uint64_t id, std::string src, std::string trg,
                              std::string src_line, std::string tgt_line);
};

struct ScoreResponse {
  std::uint64_t id = 0;
  ScoreKind kind = ScoreKind::LangId;
  std::string lang;
  double prob = 0.0;
  double loss = 0.0;

  bool operator==(const ScoreResponse&) const = default;
};

/// Request line without the trailing LF.
std::string encode_request(const ScoreRequest& req);
/// Parses one response line; validates ranges for the expected kind.
ScoreResponse decode_response(std::string_view line, ScoreKind kind);
/// As above, inferring the kind from the presence of "loss".
ScoreResponse decode_response(std::string_view line);
std::string encode_response(const ScoreResponse& resp);

/// Sidecar transcript line (`id<TAB>lang<TAB>prob` or `id<TAB>loss`), without LF.
/// Reals are printed with round-trip precision.
std::string sidecar_line(const ScoreResponse& resp);

/// Single-owner scorer handle. Responses are returned in request order.
class Scorer {
 public:
  virtual ~Scorer() = default;
  virtual std::vector<ScoreResponse> score(std::span<const ScoreRequest> requests) = 0;
};

/// Wraps a scorer and appends every response to a sidecar transcript.
class RecordingScorer : public Scorer {
 public:
  RecordingScorer(Scorer& inner, std::ostream& transcript);
  std::vector<ScoreResponse> score(std::span<const ScoreRequest> requests) override;

 private:
  Scorer& inner_;
  std::ostream& out_;
};

}  // namespace forge::scorer
