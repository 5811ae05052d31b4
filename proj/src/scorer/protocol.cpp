#include <charconv>
#include <cmath>
#include <ostream>

#include <json.hpp>

#include "forge/corpus/record.hpp"
#include "forge/scorer/scorer.hpp"

namespace forge::scorer {

using nlohmann::json;

ProtocolViolation::ProtocolViolation(const std::string& line, const std::string& why)
    : ScorerFailure("scorer protocol violation (" + why + "): " + line.substr(0, 200)),
      line_(line) {}

Timeout::Timeout(std::uint64_t id)
    : ScorerFailure("scorer timed out waiting for id " + std::to_string(id)), id_(id) {}

MissingScore::MissingScore(std::uint64_t id)
    : ScorerFailure("no score recorded for id " + std::to_string(id)), id_(id) {}

ParseError::ParseError(std::size_t line_no, const std::string& why)
    : ScorerFailure("sidecar line " + std::to_string(line_no) + ": " + why), line_no_(line_no) {}

ScoreRequest ScoreRequest::langid(std::uint64_t id, std::string text) {
  ScoreRequest r;
  r.id = id;
  r.kind = ScoreKind::LangId;
  r.text = std::move(text);
  return r;
}

ScoreRequest ScoreRequest::quality(std::uint64_t id, std::string src, std::string trg,
                                   std::string src_line, std::string tgt_line) {
  ScoreRequest r;
  r.id = id;
  r.kind = ScoreKind::Quality;
  r.src = std::move(src);
  r.trg = std::move(trg);
  r.src_line = std::move(src_line);
  r.tgt_line = std::move(tgt_line);
  return r;
}

namespace {

std::string quote(const std::string& s) {
  return json(s).dump(-1, ' ', false, json::error_handler_t::replace);
}

std::string real(double x) {
  char buf[32];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, end);
}

}  // namespace

std::string encode_request(const ScoreRequest& r) {
  const std::string id = std::to_string(r.id);
  if (r.kind == ScoreKind::LangId)
    return "{\"id\":" + id + ",\"kind\":\"langid\",\"text\":" + quote(r.text) + "}";
  return "{\"id\":" + id + ",\"kind\":\"quality\",\"src\":" + quote(r.src) +
         ",\"trg\":" + quote(r.trg) + ",\"src_line\":" + quote(r.src_line) +
         ",\"tgt_line\":" + quote(r.tgt_line) + "}";
}

std::string encode_response(const ScoreResponse& r) {
  const std::string id = std::to_string(r.id);
  if (r.kind == ScoreKind::LangId)
    return "{\"id\":" + id + ",\"lang\":" + quote(r.lang) + ",\"prob\":" + real(r.prob) + "}";
  return "{\"id\":" + id + ",\"loss\":" + real(r.loss) + "}";
}

ScoreResponse decode_response(std::string_view line, ScoreKind kind) {
  const std::string text(line);
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception&) {
    throw ProtocolViolation(text, "malformed JSON");
  }
  if (!j.is_object() || !j.contains("id") || !j["id"].is_number_unsigned())
    throw ProtocolViolation(text, "missing or invalid id");
  ScoreResponse r;
  r.id = j["id"].get<std::uint64_t>();
  r.kind = kind;
  if (kind == ScoreKind::LangId) {
    if (!j.contains("lang") || !j["lang"].is_string() || !j.contains("prob") ||
        !j["prob"].is_number())
      throw ProtocolViolation(text, "expected lang and prob");
    r.lang = j["lang"].get<std::string>();
    r.prob = j["prob"].get<double>();
    if (!corpus::LangCode::is_valid(r.lang)) throw ProtocolViolation(text, "invalid lang");
    if (!(r.prob >= 0.0 && r.prob <= 1.0)) throw ProtocolViolation(text, "prob outside [0,1]");
  } else {
    if (!j.contains("loss") || !j["loss"].is_number())
      throw ProtocolViolation(text, "expected loss");
    r.loss = j["loss"].get<double>();
    if (!std::isfinite(r.loss) || r.loss < 0.0)
      throw ProtocolViolation(text, "loss must be finite and non-negative");
  }
  return r;
}

ScoreResponse decode_response(std::string_view line) {
  json j = json::parse(line, nullptr, false);
  if (j.is_discarded()) throw ProtocolViolation(std::string(line), "malformed JSON");
  const bool quality = j.is_object() && j.contains("loss");
  return decode_response(line, quality ? ScoreKind::Quality : ScoreKind::LangId);
}

std::string sidecar_line(const ScoreResponse& r) {
  if (r.kind == ScoreKind::LangId)
    return std::to_string(r.id) + "\t" + r.lang + "\t" + real(r.prob);
  return std::to_string(r.id) + "\t" + real(r.loss);
}

RecordingScorer::RecordingScorer(Scorer& inner, std::ostream& transcript)
    : inner_(inner), out_(transcript) {}

std::vector<ScoreResponse> RecordingScorer::score(std::span<const ScoreRequest> requests) {
  auto responses = inner_.score(requests);
  for (const auto& r : responses) out_ << sidecar_line(r) << '\n';
  out_.flush();
  return responses;
}

}  // namespace forge::scorer
