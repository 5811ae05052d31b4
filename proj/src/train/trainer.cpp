#include "forge/train/trainer.hpp"

#include <algorithm>
#include <chrono>
#include <numeric>
#include <random>

#include <json.hpp>

#include "forge/lm/model.hpp"
#include "forge/util/hash.hpp"

namespace forge::train {

TrainMode parse_mode(const std::string& text, int n_layers, int k, int m,
                     const std::set<int>& skip) {
  if (text == "two-stage") return TwoStage{select_layers(n_layers, k, m, skip)};
  if (text == "single-stage") return SingleStage{select_layers(n_layers, k, m, skip)};
  if (text == "fft") return FullFineTune{};
  const std::string prefix = "single-layer:";
  if (text.rfind(prefix, 0) == 0) {
    int layer = 0;
    try {
      std::size_t used = 0;
      layer = std::stoi(text.substr(prefix.size()), &used);
      if (used != text.size() - prefix.size()) throw std::invalid_argument("trailing");
    } catch (const std::exception&) {
      throw UsageError("bad layer index in mode '" + text + "'");
    }
    if (layer < 0 || layer >= n_layers)
      throw IndexOutOfRange("layer " + std::to_string(layer) + " outside model");
    return SingleLayer{layer};
  }
  throw UsageError("unknown mode '" + text + "'");
}

std::string mode_name(const TrainMode& mode) {
  return std::visit(
      [](const auto& m) -> std::string {
        using M = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<M, TwoStage>) return "two-stage";
        if constexpr (std::is_same_v<M, SingleStage>) return "single-stage";
        if constexpr (std::is_same_v<M, FullFineTune>) return "fft";
        if constexpr (std::is_same_v<M, SingleLayer>)
          return "single-layer:" + std::to_string(m.layer);
      },
      mode);
}

std::vector<StagePlan> plan_stages(const TrainMode& mode) {
  return std::visit(
      [](const auto& m) -> std::vector<StagePlan> {
        using M = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<M, TwoStage>) {
          return {{"stage1", {m.selection.stage1_layers, false}},
                  {"stage2", {m.selection.stage2_layers, false}}};
        } else if constexpr (std::is_same_v<M, SingleStage>) {
          auto layers = m.selection.stage1_layers;
          layers.insert(m.selection.stage2_layers.begin(), m.selection.stage2_layers.end());
          return {{"single", {layers, false}}};
        } else if constexpr (std::is_same_v<M, FullFineTune>) {
          return {{"fft", {{}, true, true}}};
        } else {
          return {{"layer" + std::to_string(m.layer), {{m.layer}, false}}};
        }
      },
      mode);
}

std::vector<lm::Batch> epoch_batches(const std::vector<lm::Sequence>& data, const TrainConfig& c,
                                     int epoch, std::int32_t pad_id) {
  std::vector<std::size_t> order(data.size());
  std::iota(order.begin(), order.end(), 0);
  // Fisher-Yates with a portable generator.
  std::mt19937_64 rng(hash64(c.seed, static_cast<std::uint64_t>(epoch)));
  for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[rng() % i]);
  std::vector<lm::Batch> out;
  const auto bs = static_cast<std::size_t>(c.batch_size);
  for (std::size_t start = 0; start < order.size(); start += bs) {
    std::vector<lm::Sequence> chunk;
    for (std::size_t j = start; j < std::min(order.size(), start + bs); ++j)
      chunk.push_back(data[order[j]]);
    out.push_back(lm::make_batch(chunk, pad_id));
  }
  return out;
}

long steps_per_stage(std::size_t n, const TrainConfig& c) {
  const auto batches = (n + static_cast<std::size_t>(c.batch_size) - 1) / c.batch_size;
  const auto per_epoch = (batches + static_cast<std::size_t>(c.grad_accum) - 1) / c.grad_accum;
  return static_cast<long>(per_epoch) * c.epochs;
}

RunLog run(const TrainMode& mode, lm::Params<float>& params, const std::vector<lm::Sequence>& data,
           const TrainConfig& config, std::int32_t pad_id, const StepObserver& observer) {
  config.validate();
  const auto t0 = std::chrono::steady_clock::now();
  RunLog log;
  const long total = steps_per_stage(data.size(), config);
  auto grads = lm::GradBuffers<float>::zeros(params.config);

  for (const auto& plan : plan_stages(mode)) {
    const int stage = static_cast<int>(log.stages.size());
    StageSummary summary;
    summary.name = plan.name;
    summary.layers.assign(plan.trainable.layers.begin(), plan.trainable.layers.end());
    if (plan.trainable.all_layers) {
      summary.layers.resize(static_cast<std::size_t>(params.config.n_layers));
      std::iota(summary.layers.begin(), summary.layers.end(), 0);
    }
    summary.globals = plan.trainable.globals;
    summary.skipped = plan.trainable.empty() || data.empty();
    if (summary.skipped) {
      log.stages.push_back(summary);
      log.checkpoints.push_back(params);
      continue;
    }

    const auto mask = plan.trainable.mask(params.config);
    AdamState<float> adam;
    long step = 0;
    for (int epoch = 0; epoch < config.epochs; ++epoch) {
      const auto batches = epoch_batches(data, config, epoch, pad_id);
      const auto accum = static_cast<std::size_t>(config.grad_accum);
      for (std::size_t start = 0; start < batches.size(); start += accum) {
        const std::size_t end = std::min(batches.size(), start + accum);
        const auto window = static_cast<float>(end - start);
        grads.set_zero();
        double loss = 0;
        for (std::size_t b = start; b < end; ++b)
          loss += lm::accumulate_loss_and_backward(params, batches[b], grads, 1.0f / window);
        loss /= static_cast<double>(end - start);

        const double lr = lr_at(step, total, config);
        if (observer) observer({StepEvent::Phase::Before, stage, step, params, mask});
        optimizer_step(params, grads, adam, mask, lr, config);
        if (observer) observer({StepEvent::Phase::After, stage, step, params, mask});
        log.steps.push_back({stage, step, lr, loss});
        ++step;
      }
    }
    summary.steps = step;
    log.stages.push_back(summary);
    log.checkpoints.push_back(params);
  }
  log.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return log;
}

std::string RunLog::to_jsonl() const {
  std::string out;
  for (const auto& s : stages) {
    nlohmann::ordered_json j{{"type", "stage"}, {"name", s.name},       {"layers", s.layers},
                             {"globals", s.globals}, {"skipped", s.skipped}, {"steps", s.steps}};
    out += j.dump() + "\n";
  }
  for (const auto& s : steps) {
    nlohmann::ordered_json j{{"type", "step"},
                             {"stage", stages[static_cast<std::size_t>(s.stage)].name},
                             {"step", s.step},
                             {"lr", s.lr},
                             {"loss", s.loss}};
    out += j.dump() + "\n";
  }
  return out;
}

}  // namespace forge::train
