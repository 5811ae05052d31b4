#pragma once

#include <string>
#include <vector>

#include "forge/synth/tasks.hpp"
#include "forge/train/trainer.hpp"

namespace forge::train {

struct SweepRow {
  int layer = 0;
  synth::EvalResult translation;
  synth::EvalResult general;
  double final_loss = 0;
};

/// Trains each layer alone from a private copy of `start` and evaluates it.
/// Rows are ordered by layer regardless of how many threads run them.
std::vector<SweepRow> single_layer_sweep(const lm::Params<float>& start,
                                         const std::vector<lm::Sequence>& train_data,
                                         const std::vector<lm::Sequence>& translation_eval,
                                         const std::vector<lm::Sequence>& general_eval,
                                         const TrainConfig& config, unsigned threads = 1,
                                         std::vector<int> order = {});

/// CSV: layer,translation_ce,translation_em,general_ce,general_em,final_loss
std::string sweep_csv(const std::vector<SweepRow>& rows);

}  // namespace forge::train
