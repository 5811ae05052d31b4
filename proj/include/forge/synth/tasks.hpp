#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "forge/corpus/record.hpp"
#include "forge/lm/batch.hpp"
#include "forge/lm/params.hpp"
#include "forge/synth/vocab.hpp"

namespace forge::synth {

enum class Reorder { Identity, Reverse };

/// Toy "language pair": target = reorder(pi(source)) over content values.
struct SynthLangSpec {
  int vocab_size = 64;
  std::vector<int> permutation;  // bijection on [0, content_size)
  Reorder reorder = Reorder::Identity;

  static SynthLangSpec identity(int vocab_size, Reorder reorder = Reorder::Identity);
  static SynthLangSpec seeded(int vocab_size, std::uint64_t perm_seed,
                              Reorder reorder = Reorder::Identity);

  std::vector<int> translate(const std::vector<int>& source) const;
};

/// One generated example as content values.
struct SynthExample {
  std::vector<int> prompt;
  std::vector<int> response;
  bool operator==(const SynthExample&) const = default;
};

struct SynthCorpus {
  std::string task;  // "translation" or "general"
  std::vector<SynthExample> train_examples, eval_examples;
  std::vector<lm::Sequence> train, eval;
};

inline constexpr int kMinSourceLen = 4;
inline constexpr int kMaxSourceLen = 12;
inline constexpr int kMinGeneralLen = 3;
inline constexpr int kMaxGeneralLen = 10;
inline constexpr int kMaxGeneralStep = 7;

/// n distinct sources of length 4..12; 5% (at least one when n >= 2) held out.
SynthCorpus gen_translation_corpus(const SynthLangSpec& spec, std::size_t n, std::uint64_t seed);

/// Arithmetic continuation: prompt (k, step, len) with step in [0, 7], response
/// (k + i*step) mod content_size for i = 1..len. Prompts are distinct.
SynthCorpus gen_general_corpus(int vocab_size, std::size_t n, std::uint64_t seed);

std::vector<int> arithmetic_sequence(int k, int step, int len, int modulus);

/// Examples as parallel records (translation: qa->qb, general: qg->qh).
std::vector<corpus::ParallelRecord> to_records(const std::vector<SynthExample>& examples,
                                               bool general_task);

struct EvalResult {
  std::string task;
  double mean_ce = 0;      // per scored token
  double exact_match = 0;  // fraction of responses reproduced by greedy decoding
  std::size_t samples = 0;
};

/// Mean masked cross-entropy and greedy exact match. Greedy decoding reproduces
/// a response iff the argmax at every response position equals the reference
/// token given the reference prefix, so one teacher-forced pass suffices.
EvalResult evaluate(const lm::Params<float>& params, const std::vector<lm::Sequence>& eval_set,
                    const std::string& task, std::size_t batch_size = 32);

}  // namespace forge::synth
