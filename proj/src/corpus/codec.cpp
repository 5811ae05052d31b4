#include "forge/corpus/codec.hpp"

#include <istream>
#include <ostream>

#include <json.hpp>

namespace forge::corpus {

using nlohmann::json;

MalformedLine::MalformedLine(std::size_t line_no, const std::string& why)
    : Error("malformed record at line " + std::to_string(line_no) + ": " + why),
      line_no_(line_no) {}

namespace {

constexpr std::string_view kKeys[] = {"src", "trg", "src_line", "tgt_line"};

bool is_core_key(std::string_view key) {
  for (auto k : kKeys)
    if (k == key) return true;
  return false;
}

std::string dump(const json& j) {
  return j.dump(-1, ' ', false, json::error_handler_t::strict);
}

}  // namespace

std::string json_quote(std::string_view text) { return dump(json(std::string(text))); }

ParallelRecord parse_record_line(std::string_view line, std::size_t line_no) {
  json j;
  try {
    j = json::parse(line);
  } catch (const json::exception& e) {
    throw MalformedLine(line_no, e.what());
  }
  if (!j.is_object()) throw MalformedLine(line_no, "not a JSON object");
  for (auto k : kKeys) {
    auto it = j.find(std::string(k));
    if (it == j.end()) throw MalformedLine(line_no, "missing key '" + std::string(k) + "'");
    if (!it->is_string())
      throw MalformedLine(line_no, "key '" + std::string(k) + "' is not a string");
  }
  ParallelRecord r;
  try {
    r.src = LangCode(j["src"].get<std::string>());
    r.trg = LangCode(j["trg"].get<std::string>());
  } catch (const InvalidLangCode& e) {
    throw MalformedLine(line_no, e.what());
  }
  if (r.src == r.trg) throw MalformedLine(line_no, "src equals trg");
  r.src_line = j["src_line"].get<std::string>();
  r.tgt_line = j["tgt_line"].get<std::string>();
  for (auto it = j.begin(); it != j.end(); ++it)
    if (!is_core_key(it.key())) r.extra.emplace(it.key(), dump(it.value()));
  return r;
}

ReadResult read_records(std::istream& in, bool strict) {
  ReadResult out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    try {
      auto r = parse_record_line(line, line_no);
      r.seq = out.records.size();
      out.records.push_back(std::move(r));
    } catch (const MalformedLine&) {
      if (strict) throw;
      out.malformed_lines.push_back(line_no);
    }
  }
  return out;
}

std::string format_record_line(const ParallelRecord& r) {
  std::string s = "{\"src\":" + json_quote(r.src.str()) + ",\"trg\":" + json_quote(r.trg.str()) +
                  ",\"src_line\":" + json_quote(r.src_line) +
                  ",\"tgt_line\":" + json_quote(r.tgt_line);
  for (const auto& [key, value] : r.extra) s += "," + json_quote(key) + ":" + value;
  s += "}\n";
  return s;
}

void write_records(std::ostream& out, std::span<const ParallelRecord> records) {
  for (const auto& r : records) out << format_record_line(r);
}

}  // namespace forge::corpus
