#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "forge/lm/batch.hpp"
#include "forge/lm/params.hpp"

namespace forge::sensitivity {

struct LayerNorms {
  int layer = 0;
  double q = 0, k = 0, v = 0;
  bool operator==(const LayerNorms&) const = default;
};

struct ProbeDescriptor {
  std::string dataset;
  std::size_t batches = 0;
  std::uint64_t seed = 0;
  bool operator==(const ProbeDescriptor&) const = default;
};

struct GradientReport {
  std::vector<LayerNorms> layers;
  ProbeDescriptor probe;
  bool operator==(const GradientReport&) const = default;
};

struct ProbeOptions {
  /// Sum gradients over all batches before norming (default), or average the
  /// per-batch norms.
  bool per_batch = false;
  /// Multiplies the probe loss; norms scale by |loss_scale|.
  double loss_scale = 1.0;
  std::string dataset;
  std::uint64_t seed = 0;
};

/// Nuclear norms of each layer's W_Q, W_K, W_V gradients over the probe
/// batches. Read-only on `params`; gradients are taken in double precision.
GradientReport layer_gradient_report(const lm::Params<float>& params,
                                     const std::vector<lm::Batch>& probe,
                                     const ProbeOptions& options = {});

/// `layer,q_norm,k_norm,v_norm` with round-trip precision.
std::string render_csv(const GradientReport& report);
GradientReport parse_csv(const std::string& csv);

/// One horizontal bar per layer and matrix, scaled to the largest norm.
std::string render_bars(const GradientReport& report, int width = 40);

}  // namespace forge::sensitivity
