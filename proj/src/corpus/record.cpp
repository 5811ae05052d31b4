#include "forge/corpus/record.hpp"

#include <algorithm>

namespace forge::corpus {

InvalidLangCode::InvalidLangCode(std::string_view code)
    : Error("invalid language code '" + std::string(code) + "'") {}

LangCode::LangCode(std::string code) : code_(std::move(code)) {
  if (!is_valid(code_)) throw InvalidLangCode(code_);
}

bool LangCode::is_valid(std::string_view code) noexcept {
  if (code.size() < 2 || code.size() > 3) return false;
  return std::all_of(code.begin(), code.end(),
                     [](char c) { return c >= 'a' && c <= 'z'; });
}

}  // namespace forge::corpus
