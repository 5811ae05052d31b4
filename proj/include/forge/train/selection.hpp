#pragma once

#include <set>
#include <vector>

#include "forge/lm/config.hpp"
#include "forge/util/error.hpp"

namespace forge::train {

class OverlappingStages : public Error {
 public:
  using Error::Error;
};
class IndexOutOfRange : public Error {
 public:
  using Error::Error;
};

/// Trainable layers for the two stages: bottom k and top m, minus the skip
/// list. k and m are clamped to the layer count before the overlap check.
struct LayerSelection {
  int n_layers = 0;
  int bottom_k = 0;
  int top_m = 0;
  std::set<int> skip;
  std::set<int> stage1_layers;
  std::set<int> stage2_layers;

  bool operator==(const LayerSelection&) const = default;
};

LayerSelection select_layers(int n_layers, int k, int m, const std::set<int>& skip = {});

/// Which tensors an optimizer step may touch.
struct TrainableSet {
  std::set<int> layers;
  bool globals = false;     // embeddings and the final norm
  bool all_layers = false;  // every block, whatever the model depth

  /// Per-tensor flags in param_paths order.
  std::vector<bool> mask(const lm::ModelConfig& config) const;
  bool empty() const noexcept { return layers.empty() && !globals && !all_layers; }
};

}  // namespace forge::train
