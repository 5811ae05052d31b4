#include "forge/corpus/tokenize.hpp"

#include <memory>

#include <unicode/brkiter.h>
#include <unicode/uchar.h>
#include <unicode/unistr.h>
#include <unicode/utf8.h>

namespace forge::corpus {

TokenizationTable::TokenizationTable() : per_character_{"zh", "ja", "th"} {}

TokenizationTable::TokenizationTable(std::set<std::string> per_character)
    : per_character_(std::move(per_character)) {}

TokenizationMode TokenizationTable::mode(const LangCode& lang) const {
  return per_character_.contains(lang.str()) ? TokenizationMode::PerCharacter
                                             : TokenizationMode::Whitespace;
}

TokenizationMode tokenization_mode(const LangCode& lang) {
  static const TokenizationTable table;
  return table.mode(lang);
}

namespace {

std::vector<std::string> split_whitespace(std::string_view s) {
  std::vector<std::string> out;
  const auto* p = reinterpret_cast<const std::uint8_t*>(s.data());
  const auto n = static_cast<std::int32_t>(s.size());
  std::int32_t i = 0;
  std::int32_t start = -1;
  while (i < n) {
    std::int32_t at = i;
    UChar32 c;
    U8_NEXT(p, i, n, c);
    const bool ws = c >= 0 && u_isUWhiteSpace(c);
    if (ws) {
      if (start >= 0) out.emplace_back(s.substr(start, at - start));
      start = -1;
    } else if (start < 0) {
      start = at;
    }
  }
  if (start >= 0) out.emplace_back(s.substr(start));
  return out;
}

std::vector<std::string> split_graphemes(std::string_view s) {
  std::vector<std::string> out;
  icu::UnicodeString text = icu::UnicodeString::fromUTF8(
      icu::StringPiece(s.data(), static_cast<std::int32_t>(s.size())));
  UErrorCode status = U_ZERO_ERROR;
  std::unique_ptr<icu::BreakIterator> it(
      icu::BreakIterator::createCharacterInstance(icu::Locale::getRoot(), status));
  if (U_FAILURE(status)) throw Error("ICU character break iterator unavailable");
  it->setText(text);
  std::int32_t begin = it->first();
  for (std::int32_t end = it->next(); end != icu::BreakIterator::DONE;
       begin = end, end = it->next()) {
    icu::UnicodeString cluster(text, begin, end - begin);
    bool all_ws = true;
    for (std::int32_t k = 0; k < cluster.length();) {
      UChar32 c = cluster.char32At(k);
      if (!u_isUWhiteSpace(c)) all_ws = false;
      k += U16_LENGTH(c);
    }
    if (all_ws) continue;
    std::string utf8;
    cluster.toUTF8String(utf8);
    out.push_back(std::move(utf8));
  }
  return out;
}

}  // namespace

std::vector<std::string> tokenize(std::string_view utf8, TokenizationMode mode) {
  return mode == TokenizationMode::Whitespace ? split_whitespace(utf8) : split_graphemes(utf8);
}

}  // namespace forge::corpus
