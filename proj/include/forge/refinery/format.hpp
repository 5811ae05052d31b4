#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "forge/corpus/record.hpp"

namespace forge::refinery {

class EmptyTemplatePool : public Error {
 public:
  EmptyTemplatePool() : Error("instruction template pool is empty") {}
};

struct InstructionSample {
  std::string instruction;
  std::string response;
  corpus::LangCode src;
  corpus::LangCode trg;
  std::size_t template_id = 0;
  std::uint64_t seq = 0;

  bool operator==(const InstructionSample&) const = default;
};

/// Placeholders: {src_lang_name}, {tgt_lang_name}, {src_text}.
const std::vector<std::string>& default_templates();

/// English display name for a language code; the code itself when unknown.
std::string language_name(const corpus::LangCode& code);

std::size_t choose_template(std::uint64_t template_seed, std::uint64_t seq, std::size_t pool_size);

InstructionSample format_instruction(const corpus::ParallelRecord& record,
                                     std::span<const std::string> templates,
                                     std::uint64_t template_seed);

/// `{"seq":..,"src":..,"trg":..,"template_id":..,"instruction":..,"response":..}` + LF.
std::string format_sample_line(const InstructionSample& sample);
InstructionSample parse_sample_line(const std::string& line);

}  // namespace forge::refinery
