#include "fixture.hpp"

#include <bit>
#include <random>
#include <sstream>

#include <json.hpp>

#include "word_lists.hpp"

namespace fixture {

std::uint64_t oracle_fnv1a(const std::string& s) {
  std::uint64_t h = 14695981039346656037ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

namespace {

std::vector<std::string> split_ws(const std::string& s) {
  std::istringstream in(s);
  std::vector<std::string> out;
  for (std::string w; in >> w;) out.push_back(w);
  return out;
}

// Han characters here are all 3-byte UTF-8 sequences.
std::vector<std::string> split_han(const std::string& s) {
  std::vector<std::string> out;
  for (std::size_t i = 0; i + 3 <= s.size(); i += 3) out.push_back(s.substr(i, 3));
  return out;
}

}  // namespace

std::uint64_t oracle_simhash(const std::string& src_line, const std::string& tgt_line, bool tgt_is_han) {
  auto tokens = split_ws(src_line);
  const auto tgt = tgt_is_han ? split_han(tgt_line) : split_ws(tgt_line);
  tokens.insert(tokens.end(), tgt.begin(), tgt.end());
  long acc[64] = {};
  for (const auto& t : tokens) {
    const auto h = oracle_fnv1a(t);
    for (int b = 0; b < 64; ++b) acc[b] += (h >> b & 1) ? 1 : -1;
  }
  std::uint64_t sig = 0;
  for (int b = 0; b < 64; ++b)
    if (acc[b] > 0) sig |= 1ULL << b;
  return sig;
}

namespace {

struct Gen {
  std::mt19937_64 rng;

  std::size_t below(std::size_t n) { return static_cast<std::size_t>(rng() % n); }
  std::size_t between(std::size_t lo, std::size_t hi) { return lo + below(hi - lo + 1); }

  std::string words(const std::string& lang, std::size_t n) {
    const auto& list = word_lists().at(lang);
    std::string out;
    for (std::size_t i = 0; i < n; ++i) {
      if (i) out += ' ';
      out += list[below(list.size())];
    }
    return out;
  }

  std::string han(std::size_t n) {
    std::string out;
    for (std::size_t i = 0; i < n; ++i) out += han_chars()[below(han_chars().size())];
    return out;
  }

  // Whitespace and control-character noise that cleaning removes again.
  std::string noisy(const std::string& text) {
    static const char* const gaps[] = {"  ", "\t", "\xC2\xA0", " \x07 ", " \r\n "};
    std::string out = below(2) ? " " : "";
    for (char c : text) {
      if (c == ' ' && below(3) == 0)
        out += gaps[below(std::size(gaps))];
      else
        out += c;
    }
    if (below(2)) out += "\x0b ";
    return out;
  }
};

std::string record_line(const std::string& src, const std::string& trg, const std::string& sl,
                        const std::string& tl) {
  nlohmann::ordered_json j;
  j["src"] = src;
  j["trg"] = trg;
  j["src_line"] = sl;
  j["tgt_line"] = tl;
  return j.dump();
}

}  // namespace

Corpus refinery_corpus(std::uint64_t seed) {
  Gen g{std::mt19937_64(seed)};
  Corpus c;
  std::vector<std::string> lines;
  std::map<std::string, std::vector<std::uint64_t>> sigs;  // per target language

  struct Clean {
    std::string trg, src_line, tgt_line;
  };
  std::vector<Clean> base;

  // Accepts a record that reaches dedup only if no earlier one lies within
  // Hamming radius 3, so the planted duplicates are the only dedup drops.
  auto distinct = [&](const std::string& trg, const std::string& sl, const std::string& tl) {
    const auto sig = oracle_simhash(sl, tl, trg == "zh");
    for (auto other : sigs[trg])
      if (std::popcount(sig ^ other) <= 3) return false;
    sigs[trg].push_back(sig);
    return true;
  };

  auto plant = [&](const std::string& reason, std::size_t n, auto make) {
    for (std::size_t i = 0; i < n;) {
      const auto [trg, sl, tl] = make();
      if (reason != "TooShort" && reason != "LengthMismatch" && !distinct(trg, sl, tl)) continue;
      lines.push_back(record_line("en", trg, sl, tl));
      ++i;
    }
    c.planted[reason] += n;
  };
  using Triple = std::tuple<std::string, std::string, std::string>;

  constexpr std::size_t kBase = 825;
  while (base.size() < kBase) {
    const bool zh = g.below(4) == 0;
    const auto n = g.between(6, 10);
    Clean r{zh ? "zh" : "de", g.words("en", n), zh ? g.han(g.between(n, n + 3)) : g.words("de", g.between(n - 1, n + 1))};
    if (!distinct(r.trg, r.src_line, r.tgt_line)) continue;
    base.push_back(r);
    const bool noise = g.below(5) == 0;
    lines.push_back(record_line("en", r.trg, noise ? g.noisy(r.src_line) : r.src_line, r.tgt_line));
  }
  c.clean = kBase;

  plant("TooShort", 20, [&] { return Triple{"de", g.words("en", 1), g.words("de", 5)}; });
  plant("LengthMismatch", 20, [&] { return Triple{"de", g.words("en", 2), g.words("de", 10)}; });
  plant("LangMismatch", 25, [&] { return Triple{"de", g.words("en", 7), g.words("en", 7)}; });
  plant("LowConfidence", 25, [&] {
    std::string tl = g.words("de", 1);
    for (std::size_t i = 0, n = g.between(5, 7); i < n; ++i) tl += " " + std::to_string(10 + g.below(90));
    return Triple{"de", g.words("en", 7), tl};
  });
  plant("LowQuality", 30, [&] { return Triple{"de", g.words("en", 8), g.words("de", 7) + " zzz"}; });

  // Exact duplicates after cleaning, of distinct base records.
  std::vector<std::size_t> picks(kBase);
  for (std::size_t i = 0; i < kBase; ++i) picks[i] = i;
  for (std::size_t i = 0; i < 40; ++i) {
    std::swap(picks[i], picks[i + g.below(kBase - i)]);
    const auto& r = base[picks[i]];
    lines.push_back(record_line("en", r.trg, i % 2 ? g.noisy(r.src_line) : r.src_line, r.tgt_line));
  }
  c.planted["Duplicate"] = 40;

  const std::vector<std::string> broken = {
      "{not json",
      "[1, 2, 3]",
      R"({"src":"en","trg":"de","src_line":"the cat"})",
      R"({"src":"en","trg":"de","tgt_line":"die katze"})",
      R"({"src":"en","trg":"en","src_line":"the cat sat","tgt_line":"the dog ran"})",
      R"({"src":"de","trg":"de","src_line":"der hund","tgt_line":"die katze"})",
      R"({"src":"EN","trg":"de","src_line":"the cat sat","tgt_line":"die katze lief"})",
      R"({"src":"english","trg":"de","src_line":"the cat sat","tgt_line":"die katze lief"})",
      R"({"src":"en","trg":"de","src_line":5,"tgt_line":"die katze"})",
      R"("just a string")",
  };
  lines.insert(lines.end(), broken.begin(), broken.end());
  c.malformed = broken.size();
  c.blank = 5;
  for (std::size_t i = 0; i < c.blank; ++i) lines.emplace_back();

  for (std::size_t i = lines.size(); i > 1; --i) std::swap(lines[i - 1], lines[g.below(i)]);
  c.lines = lines.size();
  for (const auto& l : lines) c.jsonl += l + "\n";

  for (const char* trg : {"de", "zh"})
    for (int i = 1; i <= 100; ++i) {
      nlohmann::ordered_json j{{"src", "en"}, {"trg", trg}, {"loss", i / 100.0}};
      c.dev_set += j.dump() + "\n";
    }
  return c;
}

}  // namespace fixture
