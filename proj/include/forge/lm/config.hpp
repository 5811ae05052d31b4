#pragma once

#include <cstdint>
#include <string>

namespace forge::lm {

struct ModelConfig {
  int n_layers = 2;
  int d_model = 32;
  int n_heads = 4;
  int d_ff = 128;
  int vocab_size = 64;
  int max_seq_len = 32;
  std::uint64_t init_seed = 0;

  int head_dim() const noexcept { return d_model / n_heads; }
  /// Throws UsageError on invalid dimensions.
  void validate() const;

  bool operator==(const ModelConfig&) const = default;
};

std::string to_json(const ModelConfig& config);
ModelConfig model_config_from_json(const std::string& text);
ModelConfig load_model_config_file(const std::string& path);

}  // namespace forge::lm
