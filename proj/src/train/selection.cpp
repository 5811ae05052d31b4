#include "forge/train/selection.hpp"

#include <algorithm>
#include <string>

#include "forge/lm/params.hpp"

namespace forge::train {

LayerSelection select_layers(int n_layers, int k, int m, const std::set<int>& skip) {
  if (n_layers < 1) throw IndexOutOfRange("model has no layers");
  if (k < 0 || m < 0) throw IndexOutOfRange("k and m must be non-negative");
  for (int s : skip)
    if (s < 0 || s >= n_layers)
      throw IndexOutOfRange("skip index " + std::to_string(s) + " outside [0, " +
                            std::to_string(n_layers) + ")");
  LayerSelection sel;
  sel.n_layers = n_layers;
  sel.bottom_k = k;
  sel.top_m = m;
  sel.skip = skip;
  for (int l = 0; l < std::min(k, n_layers); ++l)
    if (!skip.contains(l)) sel.stage1_layers.insert(l);
  for (int l = std::max(0, n_layers - m); l < n_layers; ++l)
    if (!skip.contains(l)) sel.stage2_layers.insert(l);
  for (int l : sel.stage1_layers)
    if (sel.stage2_layers.contains(l))
      throw OverlappingStages("overlapping stages: bottom " + std::to_string(k) + " and top " + std::to_string(m) +
                              " layers overlap at layer " + std::to_string(l) + " of " +
                              std::to_string(n_layers));
  return sel;
}

std::vector<bool> TrainableSet::mask(const lm::ModelConfig& config) const {
  const auto n = lm::param_paths(config).size();
  std::vector<bool> out(n, false);
  for (std::size_t i = 0; i < n; ++i) {
    const int layer = lm::layer_of(config, i);
    out[i] = layer == lm::kGlobalLayer ? globals : all_layers || layers.contains(layer);
  }
  return out;
}

}  // namespace forge::train
