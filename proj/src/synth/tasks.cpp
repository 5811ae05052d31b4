#include "forge/synth/tasks.hpp"

#include <algorithm>
#include <numeric>
#include <random>
#include <set>

#include "forge/lm/model.hpp"
#include "forge/util/hash.hpp"

namespace forge::synth {

namespace {

/// Uniform integer in [lo, hi] without modulo bias from the raw generator.
int uniform_int(std::mt19937_64& rng, int lo, int hi) {
  const std::uint64_t span = static_cast<std::uint64_t>(hi - lo) + 1;
  const std::uint64_t limit = UINT64_MAX - UINT64_MAX % span;
  std::uint64_t x;
  do x = rng();
  while (x >= limit);
  return lo + static_cast<int>(x % span);
}

std::uint64_t hash_values(const std::vector<int>& values) {
  std::uint64_t h = kFnvOffset;
  for (int v : values) h = mix64(h ^ static_cast<std::uint64_t>(v + 1));
  return h;
}

/// Splits distinct examples 95/5 (seeded order) and encodes them.
SynthCorpus finish(std::string task, std::vector<SynthExample> examples, bool general,
                   const SynthVocab& vocab, std::uint64_t seed) {
  std::mt19937_64 rng(hash64(seed, 0x5e11u));
  for (std::size_t i = examples.size(); i > 1; --i) std::swap(examples[i - 1], examples[rng() % i]);
  const std::size_t n = examples.size();
  const std::size_t n_eval = n >= 2 ? std::max<std::size_t>(1, n / 20) : 0;
  SynthCorpus c;
  c.task = std::move(task);
  c.eval_examples.assign(examples.begin(), examples.begin() + static_cast<std::ptrdiff_t>(n_eval));
  c.train_examples.assign(examples.begin() + static_cast<std::ptrdiff_t>(n_eval), examples.end());
  for (const auto& e : c.train_examples) c.train.push_back(make_sequence(e.prompt, e.response, general, vocab));
  for (const auto& e : c.eval_examples) c.eval.push_back(make_sequence(e.prompt, e.response, general, vocab));
  return c;
}

}  // namespace

SynthLangSpec SynthLangSpec::identity(int vocab_size, Reorder reorder) {
  SynthLangSpec s;
  s.vocab_size = vocab_size;
  s.reorder = reorder;
  s.permutation.resize(static_cast<std::size_t>(SynthVocab(vocab_size).content_size()));
  std::iota(s.permutation.begin(), s.permutation.end(), 0);
  return s;
}

SynthLangSpec SynthLangSpec::seeded(int vocab_size, std::uint64_t perm_seed, Reorder reorder) {
  auto s = identity(vocab_size, reorder);
  std::mt19937_64 rng(perm_seed);
  for (std::size_t i = s.permutation.size(); i > 1; --i)
    std::swap(s.permutation[i - 1], s.permutation[rng() % i]);
  return s;
}

std::vector<int> SynthLangSpec::translate(const std::vector<int>& source) const {
  std::vector<int> out;
  out.reserve(source.size());
  for (int v : source) out.push_back(permutation.at(static_cast<std::size_t>(v)));
  if (reorder == Reorder::Reverse) std::reverse(out.begin(), out.end());
  return out;
}

std::vector<int> arithmetic_sequence(int k, int step, int len, int modulus) {
  std::vector<int> out;
  for (int i = 1; i <= len; ++i)
    out.push_back(static_cast<int>((static_cast<long>(k) + static_cast<long>(i) * step) % modulus));
  return out;
}

SynthCorpus gen_translation_corpus(const SynthLangSpec& spec, std::size_t n, std::uint64_t seed) {
  if (n < 1) throw UsageError("corpus size must be >= 1");
  const SynthVocab vocab(spec.vocab_size);
  std::mt19937_64 rng(seed);
  std::set<std::uint64_t> seen;
  std::vector<SynthExample> examples;
  while (examples.size() < n) {
    const int len = uniform_int(rng, kMinSourceLen, kMaxSourceLen);
    std::vector<int> src(static_cast<std::size_t>(len));
    for (auto& v : src) v = uniform_int(rng, 0, vocab.content_size() - 1);
    if (!seen.insert(hash_values(src)).second) continue;
    examples.push_back({src, spec.translate(src)});
  }
  return finish("translation", std::move(examples), false, vocab, seed);
}

SynthCorpus gen_general_corpus(int vocab_size, std::size_t n, std::uint64_t seed) {
  if (n < 1) throw UsageError("corpus size must be >= 1");
  const SynthVocab vocab(vocab_size);
  const int m = vocab.content_size();
  const int max_step = std::min(kMaxGeneralStep, m - 1);
  const auto distinct = static_cast<std::size_t>(m) * static_cast<std::size_t>(max_step + 1) *
                        static_cast<std::size_t>(std::min(kMaxGeneralLen, m - 1) - kMinGeneralLen + 1);
  if (n > distinct) throw UsageError("general corpus cannot hold that many distinct prompts");
  std::mt19937_64 rng(seed);
  std::set<std::uint64_t> seen;
  std::vector<SynthExample> examples;
  while (examples.size() < n) {
    const int k = uniform_int(rng, 0, m - 1);
    const int step = uniform_int(rng, 0, max_step);
    const int len = uniform_int(rng, kMinGeneralLen, std::min(kMaxGeneralLen, m - 1));
    std::vector<int> prompt{k, step, len};
    if (!seen.insert(hash_values(prompt)).second) continue;
    examples.push_back({prompt, arithmetic_sequence(k, step, len, m)});
  }
  return finish("general", std::move(examples), true, vocab, seed);
}

std::vector<corpus::ParallelRecord> to_records(const std::vector<SynthExample>& examples,
                                               bool general_task) {
  std::vector<corpus::ParallelRecord> out;
  std::uint64_t seq = 0;
  for (const auto& e : examples) {
    corpus::ParallelRecord r;
    r.src = general_task ? general_src() : translation_src();
    r.trg = general_task ? general_trg() : translation_trg();
    r.src_line = render_tokens(e.prompt, r.src.str().back());
    r.tgt_line = render_tokens(e.response, r.trg.str().back());
    r.seq = seq++;
    out.push_back(std::move(r));
  }
  return out;
}

EvalResult evaluate(const lm::Params<float>& params, const std::vector<lm::Sequence>& eval_set,
                    const std::string& task, std::size_t batch_size) {
  EvalResult result;
  result.task = task;
  result.samples = eval_set.size();
  if (eval_set.empty()) return result;
  double nll = 0;
  std::size_t positions = 0, matches = 0;
  for (std::size_t start = 0; start < eval_set.size(); start += batch_size) {
    const std::vector<lm::Sequence> chunk(
        eval_set.begin() + static_cast<std::ptrdiff_t>(start),
        eval_set.begin() + static_cast<std::ptrdiff_t>(std::min(eval_set.size(), start + batch_size)));
    const auto batch = lm::make_batch(chunk, SynthVocab::kPad);
    const auto logits = lm::forward(params, batch);
    for (Eigen::Index b = 0; b < batch.rows(); ++b) {
      const auto& z = logits[static_cast<std::size_t>(b)];
      bool exact = true;
      for (Eigen::Index t = 1; t < batch.cols(); ++t) {
        if (!batch.mask(b, t)) continue;
        const auto row = z.row(t - 1);
        const double mx = row.maxCoeff();
        const double lse = mx + std::log((row.array().cast<double>() - mx).exp().sum());
        nll += lse - static_cast<double>(row(batch.ids(b, t)));
        ++positions;
        Eigen::Index best = 0;
        row.maxCoeff(&best);
        if (best != batch.ids(b, t)) exact = false;
      }
      if (exact) ++matches;
    }
  }
  result.mean_ce = positions ? nll / static_cast<double>(positions) : 0.0;
  result.exact_match = static_cast<double>(matches) / static_cast<double>(eval_set.size());
  return result;
}

}  // namespace forge::synth
