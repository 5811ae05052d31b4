#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace fixture {

// A refinery input corpus with a known number of planted defects per stage.
struct Corpus {
  std::string jsonl;    // input lines, LF-terminated
  std::string dev_set;  // {src,trg,loss} lines
  std::size_t lines = 0;
  std::size_t blank = 0;
  std::size_t malformed = 0;
  std::size_t clean = 0;  // survive every stage
  std::map<std::string, std::size_t> planted;  // drop reason -> count
};

// 1000 lines over en-de and en-zh.
Corpus refinery_corpus(std::uint64_t seed);

// Independent SimHash: FNV-1a over whitespace tokens, Han text per character.
std::uint64_t oracle_simhash(const std::string& src_line, const std::string& tgt_line, bool tgt_is_han);

std::uint64_t oracle_fnv1a(const std::string& s);

}  // namespace fixture
