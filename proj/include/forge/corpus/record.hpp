#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <string_view>

#include "forge/util/error.hpp"

namespace forge::corpus {

class InvalidLangCode : public Error {
 public:
  explicit InvalidLangCode(std::string_view code);
};

/// Lowercase ISO-639-1/3 language tag: 2 or 3 ASCII letters.
class LangCode {
 public:
  LangCode() = default;
  explicit LangCode(std::string code);

  static bool is_valid(std::string_view code) noexcept;

  const std::string& str() const noexcept { return code_; }
  bool empty() const noexcept { return code_.empty(); }

  auto operator<=>(const LangCode&) const = default;

 private:
  std::string code_;
};

struct ParallelRecord {
  LangCode src;
  LangCode trg;
  std::string src_line;
  std::string tgt_line;
  std::uint64_t seq = 0;
  /// Unknown keys from the input object, serialized JSON values keyed by name.
  /// Preserved verbatim on round-trip.
  std::map<std::string, std::string> extra;

  bool operator==(const ParallelRecord&) const = default;
};

using LangPair = std::pair<LangCode, LangCode>;

inline LangPair pair_of(const ParallelRecord& r) { return {r.src, r.trg}; }

}  // namespace forge::corpus
