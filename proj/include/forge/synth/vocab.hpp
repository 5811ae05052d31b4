#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "forge/corpus/record.hpp"
#include "forge/lm/batch.hpp"

namespace forge::synth {

/// Integer vocabulary shared by the synthetic tasks: a few control tokens
/// followed by a contiguous content range.
struct SynthVocab {
  static constexpr std::int32_t kPad = 0;
  static constexpr std::int32_t kBos = 1;
  static constexpr std::int32_t kSep = 2;
  static constexpr std::int32_t kEos = 3;
  static constexpr std::int32_t kTaskTranslate = 4;
  static constexpr std::int32_t kTaskGeneral = 5;
  static constexpr std::int32_t kContentOffset = 8;

  int vocab_size = 64;

  explicit SynthVocab(int vocab_size = 64);
  int content_size() const noexcept { return vocab_size - kContentOffset; }
  std::int32_t content(int value) const { return kContentOffset + value; }
  int value_of(std::int32_t token) const { return token - kContentOffset; }
};

/// Language tags used when synthetic data is written as parallel records.
inline const corpus::LangCode& translation_src() {
  static const corpus::LangCode c("qa");
  return c;
}
inline const corpus::LangCode& translation_trg() {
  static const corpus::LangCode c("qb");
  return c;
}
inline const corpus::LangCode& general_src() {
  static const corpus::LangCode c("qg");
  return c;
}
inline const corpus::LangCode& general_trg() {
  static const corpus::LangCode c("qh");
  return c;
}

/// Content value v rendered as `<letter><v>`; the letter names the language.
std::string render_tokens(const std::vector<int>& values, char letter);

/// Content values of every whitespace token of the form `<letter><digits>`
/// inside the content range; all other words (template text) are ignored.
std::vector<int> parse_tokens(std::string_view text, const SynthVocab& vocab);

/// Prompt content is right-padded to this many tokens so that response
/// position j always sits a fixed distance after prompt position j.
inline constexpr std::size_t kPromptWidth = 12;

/// [BOS, task, prompt..., PAD..., SEP] -> [response..., EOS].
lm::Sequence make_sequence(const std::vector<int>& prompt, const std::vector<int>& response,
                           bool general_task, const SynthVocab& vocab);

/// make_sequence over the synthetic tokens found in a text pair.
lm::Sequence encode_pair(std::string_view prompt_text, std::string_view response_text,
                         bool general_task, const SynthVocab& vocab);

/// Reads record-format or instruction-format JSONL into training sequences.
/// Pairs (qg, qh) map to the general task; everything else is translation.
std::vector<lm::Sequence> load_sequences(const std::string& path, const SynthVocab& vocab);

}  // namespace forge::synth
