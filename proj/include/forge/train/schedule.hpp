#pragma once

#include <cstdint>
#include <string>

namespace forge::train {

struct TrainConfig {
  double lr_max = 1e-5;
  double lr_min = 2e-6;
  double warmup_ratio = 0.03;
  int epochs = 1;
  int batch_size = 1;
  int grad_accum = 2;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double weight_decay = 0.0;
  std::uint64_t seed = 0;

  /// Throws UsageError on invalid values.
  void validate() const;
  bool operator==(const TrainConfig&) const = default;
};

std::string to_json(const TrainConfig& config);
TrainConfig train_config_from_json(const std::string& text);

/// Number of warmup steps: ceil(warmup_ratio * total_steps).
long warmup_steps(long total_steps, double warmup_ratio);

/// Linear warmup to lr_max, then cosine decay reaching lr_min at the last step.
double lr_at(long step, long total_steps, const TrainConfig& config);

}  // namespace forge::train
