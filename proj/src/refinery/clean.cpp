#include "forge/refinery/clean.hpp"

#include <unicode/normalizer2.h>
#include <unicode/uchar.h>
#include <unicode/unistr.h>

#include "forge/util/error.hpp"

namespace forge::refinery {

namespace {

const icu::Normalizer2& nfc() {
  UErrorCode status = U_ZERO_ERROR;
  const icu::Normalizer2* n = icu::Normalizer2::getNFCInstance(status);
  if (U_FAILURE(status)) throw Error("ICU NFC normalizer unavailable");
  return *n;
}

icu::UnicodeString normalize(const icu::UnicodeString& s) {
  UErrorCode status = U_ZERO_ERROR;
  icu::UnicodeString out = nfc().normalize(s, status);
  if (U_FAILURE(status)) throw Error("NFC normalization failed");
  return out;
}

bool is_dropped(UChar32 c) {
  if (c == 0xFFFD) return true;
  if (U_IS_SURROGATE(c)) return true;
  if (c == '\n' || c == '\t') return false;
  return u_charType(c) == U_CONTROL_CHAR;
}

}  // namespace

std::string clean_text(std::string_view utf8) {
  // fromUTF8 maps ill-formed input to U+FFFD, which is then removed.
  icu::UnicodeString text = normalize(icu::UnicodeString::fromUTF8(
      icu::StringPiece(utf8.data(), static_cast<std::int32_t>(utf8.size()))));

  icu::UnicodeString out;
  bool pending_space = false;
  for (std::int32_t i = 0; i < text.length();) {
    UChar32 c = text.char32At(i);
    i += U16_LENGTH(c);
    if (is_dropped(c)) continue;
    if (u_isUWhiteSpace(c)) {
      pending_space = true;
      continue;
    }
    if (pending_space && !out.isEmpty()) out.append(static_cast<UChar>(' '));
    pending_space = false;
    out.append(c);
  }
  // Removing a control character can leave a newly composable sequence behind.
  out = normalize(out);
  std::string result;
  out.toUTF8String(result);
  return result;
}

corpus::ParallelRecord clean_record(corpus::ParallelRecord record) {
  record.src_line = clean_text(record.src_line);
  record.tgt_line = clean_text(record.tgt_line);
  return record;
}

}  // namespace forge::refinery
