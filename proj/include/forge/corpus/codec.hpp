#pragma once

#include <cstddef>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "forge/corpus/record.hpp"

namespace forge::corpus {

class MalformedLine : public Error {
 public:
  MalformedLine(std::size_t line_no, const std::string& why);
  std::size_t line_no() const noexcept { return line_no_; }

 private:
  std::size_t line_no_;
};

struct ReadResult {
  std::vector<ParallelRecord> records;
  /// 1-based physical line numbers that failed to parse (lenient mode only).
  std::vector<std::size_t> malformed_lines;
};

/// Parses one JSONL record line. `seq` is left at 0.
ParallelRecord parse_record_line(std::string_view line, std::size_t line_no);

/// Reads newline-delimited records. Blank lines are skipped; seq is assigned
/// 0,1,2,... over the records actually yielded. In strict mode the first bad
/// line throws MalformedLine, otherwise it is counted and skipped.
ReadResult read_records(std::istream& in, bool strict = false);

std::string format_record_line(const ParallelRecord& record);
void write_records(std::ostream& out, std::span<const ParallelRecord> records);

/// JSON string literal (compact, UTF-8 passthrough) for `text`.
std::string json_quote(std::string_view text);

}  // namespace forge::corpus
