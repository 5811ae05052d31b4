#include "forge/scorer/sidecar.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <vector>

#include "forge/corpus/record.hpp"

namespace forge::scorer {

namespace {

std::vector<std::string_view> split_tabs(std::string_view s) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (std::size_t i = 0; i <= s.size(); ++i) {
    if (i == s.size() || s[i] == '\t') {
      out.push_back(s.substr(start, i - start));
      start = i + 1;
    }
  }
  return out;
}

template <typename T>
bool parse_number(std::string_view s, T& out) {
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc{} && p == s.data() + s.size();
}

}  // namespace

SidecarScorer::SidecarScorer(std::istream& in) {
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto fields = split_tabs(line);
    ScoreResponse r;
    if (!parse_number(fields[0], r.id)) throw ParseError(line_no, "bad id");
    if (fields.size() == 2) {
      r.kind = ScoreKind::Quality;
      if (!parse_number(fields[1], r.loss) || !std::isfinite(r.loss) || r.loss < 0.0)
        throw ParseError(line_no, "bad loss");
    } else if (fields.size() == 3) {
      r.kind = ScoreKind::LangId;
      r.lang = std::string(fields[1]);
      if (!corpus::LangCode::is_valid(r.lang)) throw ParseError(line_no, "bad language code");
      if (!parse_number(fields[2], r.prob) || !(r.prob >= 0.0 && r.prob <= 1.0))
        throw ParseError(line_no, "bad probability");
    } else {
      throw ParseError(line_no, "expected 2 or 3 tab-separated fields");
    }
    if (!entries_.emplace(r.id, r).second)
      throw ParseError(line_no, "duplicate id " + std::to_string(r.id));
  }
}

SidecarScorer SidecarScorer::from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ScorerFailure("cannot open sidecar " + path);
  return SidecarScorer(in);
}

std::vector<ScoreResponse> SidecarScorer::score(std::span<const ScoreRequest> requests) {
  std::vector<ScoreResponse> out;
  out.reserve(requests.size());
  for (const auto& req : requests) {
    auto it = entries_.find(req.id);
    if (it == entries_.end()) throw MissingScore(req.id);
    if (it->second.kind != req.kind)
      throw ScorerFailure("sidecar entry for id " + std::to_string(req.id) +
                          " has the wrong score kind");
    out.push_back(it->second);
  }
  return out;
}

}  // namespace forge::scorer
