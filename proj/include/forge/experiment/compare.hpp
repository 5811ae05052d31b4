#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "forge/lm/params.hpp"
#include "forge/synth/tasks.hpp"
#include "forge/train/trainer.hpp"

namespace forge::experiment {

struct ExperimentRow {
  std::string label;
  train::TrainMode mode;
  train::TrainConfig config;
};

struct ComparisonRow {
  std::string label;
  std::string mode;
  synth::EvalResult translation;
  synth::EvalResult general;
  double delta_general_ce = 0;  // general CE after tuning minus general CE of the start model
  double final_loss = 0;
};

struct ComparisonTable {
  synth::EvalResult start_translation;
  synth::EvalResult start_general;
  std::vector<ComparisonRow> rows;

  std::string to_csv() const;
  std::string to_json() const;
};

/// Trains every row from the same start parameters over the same data order
/// and evaluates both tasks. Errors are rethrown prefixed with the row label.
ComparisonTable compare(const lm::Params<float>& start,
                        const std::vector<lm::Sequence>& translation_train,
                        const std::vector<lm::Sequence>& translation_eval,
                        const std::vector<lm::Sequence>& general_eval,
                        const std::vector<ExperimentRow>& rows);

/// Desk-scale stand-in for "start from an instruct model": a fresh model fully
/// trained on the general task.
lm::Params<float> pretrain_start_model(const lm::ModelConfig& model,
                                       const std::vector<lm::Sequence>& general_train,
                                       const train::TrainConfig& config);

/// The pinned reference configuration: L=8, d_model=64, vocab 64, k=2, m=3.
struct ReferenceSetup {
  lm::ModelConfig model;
  synth::SynthCorpus translation;
  synth::SynthCorpus general;
  train::TrainConfig pretrain;
  train::TrainConfig tune;
  int k = 2;
  int m = 3;
};

ReferenceSetup reference_setup(std::uint64_t seed = 7);

/// Experiment description read by `forge compare`.
struct ExperimentSpec {
  lm::ModelConfig model;
  std::optional<std::filesystem::path> start_checkpoint;
  std::filesystem::path translation_data, translation_eval, general_eval;
  std::optional<std::filesystem::path> general_data;  // pretraining data when no checkpoint
  train::TrainConfig pretrain;
  std::vector<ExperimentRow> rows;
  std::filesystem::path output_dir;
  std::uint64_t seed = 0;
};

/// Relative paths resolve against `base_dir`. Row train configs inherit the
/// global seed unless they set their own.
ExperimentSpec load_experiment_spec(const std::string& json_text,
                                    const std::filesystem::path& base_dir);

}  // namespace forge::experiment
