#include "forge/refinery/format.hpp"

#include <map>

#include <json.hpp>

#include "forge/corpus/codec.hpp"
#include "forge/util/hash.hpp"

namespace forge::refinery {

const std::vector<std::string>& default_templates() {
  static const std::vector<std::string> pool = {
      "Translate the following {src_lang_name} text into {tgt_lang_name}.\n{src_text}",
      "Please translate this sentence from {src_lang_name} to {tgt_lang_name}:\n{src_text}",
      "{src_lang_name}: {src_text}\n{tgt_lang_name}:",
      "What is the {tgt_lang_name} translation of the following {src_lang_name} sentence?\n"
      "{src_text}",
      "Render the {src_lang_name} passage below in fluent {tgt_lang_name}.\n\n{src_text}",
      "Translate from {src_lang_name} into {tgt_lang_name}. Output only the translation.\n"
      "{src_text}",
  };
  return pool;
}

std::string language_name(const corpus::LangCode& code) {
  static const std::map<std::string, std::string> names = {
      {"ar", "Arabic"},     {"bn", "Bengali"},   {"cs", "Czech"},    {"de", "German"},
      {"en", "English"},    {"es", "Spanish"},   {"fr", "French"},   {"hu", "Hungarian"},
      {"ja", "Japanese"},   {"ko", "Korean"},    {"ru", "Russian"},  {"sr", "Serbian"},
      {"sw", "Swahili"},    {"te", "Telugu"},    {"th", "Thai"},     {"vi", "Vietnamese"},
      {"zh", "Chinese"},    {"kk", "Kazakh"},    {"pt", "Portuguese"}, {"it", "Italian"},
  };
  auto it = names.find(code.str());
  return it != names.end() ? it->second : code.str();
}

std::size_t choose_template(std::uint64_t template_seed, std::uint64_t seq, std::size_t pool_size) {
  if (pool_size == 0) throw EmptyTemplatePool();
  return static_cast<std::size_t>(hash64(template_seed, seq) % pool_size);
}

namespace {

void replace_all(std::string& s, const std::string& from, const std::string& to) {
  for (std::size_t pos = s.find(from); pos != std::string::npos; pos = s.find(from, pos + to.size()))
    s.replace(pos, from.size(), to);
}

}  // namespace

InstructionSample format_instruction(const corpus::ParallelRecord& record,
                                     std::span<const std::string> templates,
                                     std::uint64_t template_seed) {
  InstructionSample s;
  s.template_id = choose_template(template_seed, record.seq, templates.size());
  std::string text = templates[s.template_id];
  // {src_text} last so placeholder-like text inside the sentence stays verbatim.
  replace_all(text, "{src_lang_name}", language_name(record.src));
  replace_all(text, "{tgt_lang_name}", language_name(record.trg));
  replace_all(text, "{src_text}", record.src_line);
  s.instruction = std::move(text);
  s.response = record.tgt_line;
  s.src = record.src;
  s.trg = record.trg;
  s.seq = record.seq;
  return s;
}

std::string format_sample_line(const InstructionSample& s) {
  using corpus::json_quote;
  return "{\"seq\":" + std::to_string(s.seq) + ",\"src\":" + json_quote(s.src.str()) +
         ",\"trg\":" + json_quote(s.trg.str()) + ",\"template_id\":" +
         std::to_string(s.template_id) + ",\"instruction\":" + json_quote(s.instruction) +
         ",\"response\":" + json_quote(s.response) + "}\n";
}

InstructionSample parse_sample_line(const std::string& line) {
  auto j = nlohmann::json::parse(line);
  InstructionSample s;
  s.seq = j.at("seq").get<std::uint64_t>();
  s.src = corpus::LangCode(j.at("src").get<std::string>());
  s.trg = corpus::LangCode(j.at("trg").get<std::string>());
  s.template_id = j.at("template_id").get<std::size_t>();
  s.instruction = j.at("instruction").get<std::string>();
  s.response = j.at("response").get<std::string>();
  return s;
}

}  // namespace forge::refinery
