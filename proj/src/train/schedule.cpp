#include "forge/train/schedule.hpp"

#include <cmath>
#include <numbers>

#include <json.hpp>

#include "forge/util/error.hpp"

namespace forge::train {

void TrainConfig::validate() const {
  if (!(lr_min <= lr_max)) throw UsageError("lr_min must not exceed lr_max");
  if (!(warmup_ratio >= 0.0 && warmup_ratio < 1.0))
    throw UsageError("warmup_ratio must lie in [0, 1)");
  if (epochs < 1 || batch_size < 1 || grad_accum < 1)
    throw UsageError("epochs, batch_size and grad_accum must be >= 1");
  if (!(beta1 >= 0 && beta1 < 1 && beta2 >= 0 && beta2 < 1 && eps > 0))
    throw UsageError("invalid Adam hyperparameters");
}

std::string to_json(const TrainConfig& c) {
  nlohmann::ordered_json j{{"lr_max", c.lr_max},         {"lr_min", c.lr_min},
                           {"warmup_ratio", c.warmup_ratio}, {"epochs", c.epochs},
                           {"batch_size", c.batch_size}, {"grad_accum", c.grad_accum},
                           {"beta1", c.beta1},           {"beta2", c.beta2},
                           {"eps", c.eps},               {"weight_decay", c.weight_decay},
                           {"seed", c.seed}};
  return j.dump();
}

TrainConfig train_config_from_json(const std::string& text) {
  TrainConfig c;
  try {
    const auto j = nlohmann::json::parse(text);
    c.lr_max = j.value("lr_max", c.lr_max);
    c.lr_min = j.value("lr_min", c.lr_min);
    c.warmup_ratio = j.value("warmup_ratio", c.warmup_ratio);
    c.epochs = j.value("epochs", c.epochs);
    c.batch_size = j.value("batch_size", c.batch_size);
    c.grad_accum = j.value("grad_accum", c.grad_accum);
    c.beta1 = j.value("beta1", c.beta1);
    c.beta2 = j.value("beta2", c.beta2);
    c.eps = j.value("eps", c.eps);
    c.weight_decay = j.value("weight_decay", c.weight_decay);
    c.seed = j.value("seed", c.seed);
  } catch (const nlohmann::json::exception& e) {
    throw UsageError(std::string("train config: ") + e.what());
  }
  c.validate();
  return c;
}

long warmup_steps(long total_steps, double warmup_ratio) {
  // 0.03 * 100 evaluates to 3.0000000000000004; the slack keeps W = 3.
  return static_cast<long>(std::ceil(warmup_ratio * static_cast<double>(total_steps) - 1e-9));
}

double lr_at(long step, long total_steps, const TrainConfig& c) {
  const long w = warmup_steps(total_steps, c.warmup_ratio);
  if (step < w) return c.lr_max * (static_cast<double>(step + 1) / static_cast<double>(w));
  const long span = total_steps - w - 1;
  if (span <= 0) return c.lr_max;
  const double progress = static_cast<double>(step - w) / static_cast<double>(span);
  return c.lr_min + 0.5 * (c.lr_max - c.lr_min) * (1.0 + std::cos(std::numbers::pi * progress));
}

}  // namespace forge::train
