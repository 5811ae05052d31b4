#pragma once

#include <string>
#include <string_view>

#include "forge/corpus/record.hpp"

namespace forge::refinery {

/// NFC-normalizes, strips control characters (keeping \n and \t until the
/// whitespace pass), U+FFFD and ill-formed sequences, collapses whitespace runs
/// to one space and trims. Idempotent.
std::string clean_text(std::string_view utf8);

corpus::ParallelRecord clean_record(corpus::ParallelRecord record);

}  // namespace forge::refinery
