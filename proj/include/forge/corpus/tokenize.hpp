#pragma once

#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "forge/corpus/record.hpp"

namespace forge::corpus {

enum class TokenizationMode { Whitespace, PerCharacter };

/// Languages written without inter-word spaces; tokenized per grapheme cluster.
class TokenizationTable {
 public:
  TokenizationTable();  // {zh, ja, th}
  explicit TokenizationTable(std::set<std::string> per_character);

  TokenizationMode mode(const LangCode& lang) const;
  const std::set<std::string>& per_character() const noexcept { return per_character_; }

 private:
  std::set<std::string> per_character_;
};

TokenizationMode tokenization_mode(const LangCode& lang);

/// Whitespace: splits on runs of Unicode White_Space.
/// PerCharacter: one token per extended grapheme cluster, whitespace dropped.
std::vector<std::string> tokenize(std::string_view utf8, TokenizationMode mode);

}  // namespace forge::corpus
