#include <doctest.h>

#include <random>
#include <sstream>

#include "forge/corpus/codec.hpp"
#include "forge/corpus/record.hpp"
#include "forge/corpus/tokenize.hpp"
#include "support/random_text.hpp"

using namespace forge::corpus;

namespace {

ReadResult read_string(const std::string& s, bool strict = false) {
  std::istringstream in(s);
  return read_records(in, strict);
}

std::string write_string(const std::vector<ParallelRecord>& rs) {
  std::ostringstream out;
  write_records(out, rs);
  return out.str();
}

}  // namespace

TEST_CASE("language codes are two or three lowercase ASCII letters") {
  CHECK(LangCode::is_valid("en"));
  CHECK(LangCode::is_valid("yue"));
  CHECK_FALSE(LangCode::is_valid(""));
  CHECK_FALSE(LangCode::is_valid("e"));
  CHECK_FALSE(LangCode::is_valid("engl"));
  CHECK_FALSE(LangCode::is_valid("EN"));
  CHECK_FALSE(LangCode::is_valid("e1"));
  CHECK_THROWS_AS(LangCode("Zh"), InvalidLangCode);
  CHECK(LangCode("sw").str() == "sw");
}

TEST_CASE("read_records parses a record and assigns seq 0") {
  const auto r = read_string(R"({"src":"en","trg":"zh","src_line":"Hi","tgt_line":"你好"})" "\n");
  REQUIRE(r.records.size() == 1);
  CHECK(r.records[0].src.str() == "en");
  CHECK(r.records[0].trg.str() == "zh");
  CHECK(r.records[0].src_line == "Hi");
  CHECK(r.records[0].tgt_line == "你好");
  CHECK(r.records[0].seq == 0);
}

TEST_CASE("empty stream yields nothing") {
  CHECK(read_string("").records.empty());
  CHECK(read_string("\n\n  \n").records.empty());
}

TEST_CASE("missing key is a malformed line") {
  const std::string line = R"({"src":"en","trg":"zh","src_line":"Hi"})" "\n";
  try {
    read_string(line, true);
    FAIL("expected MalformedLine");
  } catch (const MalformedLine& e) {
    CHECK(e.line_no() == 1);
  }
  const auto lenient = read_string(line);
  CHECK(lenient.records.empty());
  CHECK(lenient.malformed_lines == std::vector<std::size_t>{1});
}

TEST_CASE("identical source and target language is malformed") {
  const auto r = read_string(R"({"src":"en","trg":"en","src_line":"a","tgt_line":"b"})" "\n");
  CHECK(r.records.empty());
  CHECK(r.malformed_lines.size() == 1);
}

TEST_CASE("seq counts yielded records and skips blank and bad lines") {
  const std::string good = R"({"src":"en","trg":"de","src_line":"a","tgt_line":"b"})";
  const auto r = read_string(good + "\n\nbroken\n" + good + "\n" + good);
  REQUIRE(r.records.size() == 3);
  for (std::size_t i = 0; i < 3; ++i) CHECK(r.records[i].seq == i);
  CHECK(r.malformed_lines == std::vector<std::size_t>{3});
}

TEST_CASE("write_records emits one LF-terminated line per record") {
  CHECK(write_string({}).empty());
  ParallelRecord r{LangCode("en"), LangCode("de"), "the cat", "die katze", 0, {}};
  CHECK(write_string({r}) ==
        "{\"src\":\"en\",\"trg\":\"de\",\"src_line\":\"the cat\",\"tgt_line\":\"die katze\"}\n");
}

TEST_CASE("extra keys survive a round trip") {
  const std::string line =
      R"({"src":"en","trg":"de","src_line":"a","tgt_line":"b","score":[1,2],"id":"x7"})";
  const auto r = read_string(line);
  REQUIRE(r.records.size() == 1);
  CHECK(r.records[0].extra.size() == 2);
  const auto again = read_string(write_string(r.records));
  CHECK(again.records == r.records);
}

TEST_CASE("codec round trip over random unicode records") {
  std::mt19937_64 rng(20240611);
  const char* langs[] = {"en", "zh", "de", "ja", "sw", "tha"};
  std::vector<ParallelRecord> rs;
  for (std::uint64_t i = 0; i < 1000; ++i) {
    ParallelRecord r;
    const auto a = rng() % 6;
    r.src = LangCode(langs[a]);
    r.trg = LangCode(langs[(a + 1 + rng() % 5) % 6]);
    r.src_line = fixture::random_unicode(rng, 24);
    r.tgt_line = fixture::random_unicode(rng, 24);
    r.seq = i;
    rs.push_back(r);
  }
  const auto back = read_string(write_string(rs), true);
  REQUIRE(back.records.size() == rs.size());
  for (std::size_t i = 0; i < rs.size(); ++i) CHECK(back.records[i] == rs[i]);
}

TEST_CASE("tokenization mode table") {
  CHECK(tokenization_mode(LangCode("zh")) == TokenizationMode::PerCharacter);
  CHECK(tokenization_mode(LangCode("ja")) == TokenizationMode::PerCharacter);
  CHECK(tokenization_mode(LangCode("th")) == TokenizationMode::PerCharacter);
  CHECK(tokenization_mode(LangCode("en")) == TokenizationMode::Whitespace);
  CHECK(tokenization_mode(LangCode("xx")) == TokenizationMode::Whitespace);

  const TokenizationTable custom({"my"});
  CHECK(custom.mode(LangCode("my")) == TokenizationMode::PerCharacter);
  CHECK(custom.mode(LangCode("zh")) == TokenizationMode::Whitespace);
}

TEST_CASE("tokenize examples") {
  using V = std::vector<std::string>;
  CHECK(tokenize("a  b", TokenizationMode::Whitespace) == V{"a", "b"});
  CHECK(tokenize("你好", TokenizationMode::PerCharacter) == V{"你", "好"});
  CHECK(tokenize("hello 世界", TokenizationMode::Whitespace) == V{"hello", "世界"});
  CHECK(tokenize("", TokenizationMode::Whitespace).empty());
  CHECK(tokenize("", TokenizationMode::PerCharacter).empty());
  // U+3000 ideographic space and NBSP are whitespace.
  CHECK(tokenize("a\u3000b\u00a0c", TokenizationMode::Whitespace) == V{"a", "b", "c"});
  // Combining marks stay with their base letter.
  CHECK(tokenize("e\u0301x y", TokenizationMode::PerCharacter) == V{"e\u0301", "x", "y"});
  // Thai vowel sign is part of the preceding cluster.
  CHECK(tokenize("กิ", TokenizationMode::PerCharacter).size() == 1);
}

TEST_CASE("tokens are never empty and whitespace tokens re-join stably") {
  std::mt19937_64 rng(7);
  for (int i = 0; i < 500; ++i) {
    const auto text = fixture::random_unicode(rng, 30);
    for (auto mode : {TokenizationMode::Whitespace, TokenizationMode::PerCharacter})
      for (const auto& t : tokenize(text, mode)) CHECK_FALSE(t.empty());
    const auto toks = tokenize(text, TokenizationMode::Whitespace);
    std::string joined;
    for (const auto& t : toks) joined += (joined.empty() ? "" : " ") + t;
    CHECK(tokenize(joined, TokenizationMode::Whitespace) == toks);
  }
}
