#pragma once

#include <functional>
#include <string>
#include <variant>
#include <vector>

#include "forge/lm/batch.hpp"
#include "forge/lm/params.hpp"
#include "forge/train/adamw.hpp"
#include "forge/train/schedule.hpp"
#include "forge/train/selection.hpp"

namespace forge::train {

struct TwoStage {
  LayerSelection selection;
};
struct SingleStage {
  LayerSelection selection;  // trains stage1_layers | stage2_layers at once
};
struct FullFineTune {};
struct SingleLayer {
  int layer = 0;
};

using TrainMode = std::variant<TwoStage, SingleStage, FullFineTune, SingleLayer>;

/// Parses `two-stage`, `single-stage`, `fft` or `single-layer:<l>` against a
/// selection built from k, m and skip.
TrainMode parse_mode(const std::string& text, int n_layers, int k, int m, const std::set<int>& skip);
std::string mode_name(const TrainMode& mode);

/// One optimization phase with its own schedule and optimizer state.
struct StagePlan {
  std::string name;
  TrainableSet trainable;
};

std::vector<StagePlan> plan_stages(const TrainMode& mode);

struct StepRecord {
  int stage = 0;  // index into RunLog::stages
  long step = 0;
  double lr = 0;
  double loss = 0;
};

struct StageSummary {
  std::string name;
  std::vector<int> layers;
  bool globals = false;
  bool skipped = false;  // nothing trainable
  long steps = 0;
};

struct RunLog {
  std::vector<StageSummary> stages;
  std::vector<StepRecord> steps;
  /// Parameters at the end of each stage.
  std::vector<lm::Params<float>> checkpoints;
  double wall_seconds = 0;

  /// JSON lines: one "stage" line per stage, then one "step" line per step.
  /// Wall-clock time is not included.
  std::string to_jsonl() const;
};

struct StepEvent {
  enum class Phase { Before, After } phase;
  int stage;
  long step;
  const lm::Params<float>& params;
  const std::vector<bool>& trainable;
};

using StepObserver = std::function<void(const StepEvent&)>;

/// Micro-batches visited in one epoch: a seeded shuffle of the sequence order,
/// cut into batches of batch_size. Identical for every mode given the seed.
std::vector<lm::Batch> epoch_batches(const std::vector<lm::Sequence>& data, const TrainConfig& config,
                                     int epoch, std::int32_t pad_id);

/// Optimizer steps per stage: epochs * ceil(ceil(N / batch_size) / grad_accum).
long steps_per_stage(std::size_t n_sequences, const TrainConfig& config);

/// Trains `params` in place according to `mode`.
RunLog run(const TrainMode& mode, lm::Params<float>& params, const std::vector<lm::Sequence>& data,
           const TrainConfig& config, std::int32_t pad_id, const StepObserver& observer = {});

}  // namespace forge::train
