#include "forge/synth/vocab.hpp"

#include <charconv>
#include <fstream>

#include <json.hpp>

#include "forge/corpus/tokenize.hpp"

namespace forge::synth {

SynthVocab::SynthVocab(int size) : vocab_size(size) {
  if (size <= kContentOffset + 1)
    throw UsageError("synthetic vocabulary needs more than " + std::to_string(kContentOffset + 1) +
                     " tokens");
}

std::string render_tokens(const std::vector<int>& values, char letter) {
  std::string out;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) out += ' ';
    out += letter;
    out += std::to_string(values[i]);
  }
  return out;
}

std::vector<int> parse_tokens(std::string_view text, const SynthVocab& vocab) {
  std::vector<int> out;
  for (const auto& word : corpus::tokenize(text, corpus::TokenizationMode::Whitespace)) {
    if (word.size() < 2 || word[0] < 'a' || word[0] > 'z') continue;
    int v = 0;
    auto [p, ec] = std::from_chars(word.data() + 1, word.data() + word.size(), v);
    if (ec != std::errc{} || p != word.data() + word.size()) continue;
    if (v >= 0 && v < vocab.content_size()) out.push_back(v);
  }
  return out;
}

lm::Sequence make_sequence(const std::vector<int>& prompt, const std::vector<int>& response,
                           bool general_task, const SynthVocab& vocab) {
  lm::Sequence s;
  s.prompt = {SynthVocab::kBos,
              general_task ? SynthVocab::kTaskGeneral : SynthVocab::kTaskTranslate};
  for (int v : prompt) s.prompt.push_back(vocab.content(v));
  for (std::size_t i = prompt.size(); i < kPromptWidth; ++i) s.prompt.push_back(SynthVocab::kPad);
  s.prompt.push_back(SynthVocab::kSep);
  for (int v : response) s.response.push_back(vocab.content(v));
  s.response.push_back(SynthVocab::kEos);
  return s;
}

lm::Sequence encode_pair(std::string_view prompt_text, std::string_view response_text,
                         bool general_task, const SynthVocab& vocab) {
  return make_sequence(parse_tokens(prompt_text, vocab), parse_tokens(response_text, vocab),
                       general_task, vocab);
}

std::vector<lm::Sequence> load_sequences(const std::string& path, const SynthVocab& vocab) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open data file " + path);
  std::vector<lm::Sequence> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const auto j = nlohmann::json::parse(line);
      const bool general = j.value("src", "") == general_src().str() &&
                           j.value("trg", "") == general_trg().str();
      if (j.contains("instruction"))
        out.push_back(encode_pair(j.at("instruction").get<std::string>(),
                                  j.at("response").get<std::string>(), general, vocab));
      else
        out.push_back(encode_pair(j.at("src_line").get<std::string>(),
                                  j.at("tgt_line").get<std::string>(), general, vocab));
    } catch (const nlohmann::json::exception& e) {
      throw Error(path + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  return out;
}

}  // namespace forge::synth
