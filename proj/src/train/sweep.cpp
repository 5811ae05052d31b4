#include "forge/train/sweep.hpp"

#include <atomic>
#include <cstdio>
#include <exception>
#include <mutex>
#include <string>
#include <thread>

namespace forge::train {

std::vector<SweepRow> single_layer_sweep(const lm::Params<float>& start,
                                         const std::vector<lm::Sequence>& train_data,
                                         const std::vector<lm::Sequence>& translation_eval,
                                         const std::vector<lm::Sequence>& general_eval,
                                         const TrainConfig& config, unsigned threads,
                                         std::vector<int> order) {
  const int n_layers = start.config.n_layers;
  if (order.empty())
    for (int l = 0; l < n_layers; ++l) order.push_back(l);
  std::vector<bool> seen(static_cast<std::size_t>(n_layers), false);
  for (int l : order) {
    if (l < 0 || l >= n_layers || seen[static_cast<std::size_t>(l)])
      throw IndexOutOfRange("sweep order must be a permutation of 0.." + std::to_string(n_layers - 1));
    seen[static_cast<std::size_t>(l)] = true;
  }
  if (order.size() != static_cast<std::size_t>(n_layers))
    throw IndexOutOfRange("sweep order must list every layer once");
  std::vector<SweepRow> rows(static_cast<std::size_t>(n_layers));
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mu;

  auto worker = [&] {
    for (std::size_t i; (i = next.fetch_add(1)) < order.size();) {
      try {
        const int layer = order[i];
        lm::Params<float> params = start;
        const auto log = run(SingleLayer{layer}, params, train_data, config, synth::SynthVocab::kPad);
        SweepRow row;
        row.layer = layer;
        row.final_loss = log.steps.empty() ? 0.0 : log.steps.back().loss;
        row.translation = synth::evaluate(params, translation_eval, "translation");
        row.general = synth::evaluate(params, general_eval, "general");
        rows[static_cast<std::size_t>(layer)] = std::move(row);
      } catch (...) {
        std::lock_guard lock(failure_mu);
        if (!failure) failure = std::current_exception();
      }
    }
  };
  threads = std::max(1U, std::min<unsigned>(threads, static_cast<unsigned>(order.size())));
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  if (failure) std::rethrow_exception(failure);
  return rows;
}

std::string sweep_csv(const std::vector<SweepRow>& rows) {
  std::string out = "layer,translation_ce,translation_em,general_ce,general_em,final_loss\n";
  char buf[256];
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof buf, "%d,%.9g,%.9g,%.9g,%.9g,%.9g\n", r.layer, r.translation.mean_ce,
                  r.translation.exact_match, r.general.mean_ce, r.general.exact_match, r.final_loss);
    out += buf;
  }
  return out;
}

}  // namespace forge::train
