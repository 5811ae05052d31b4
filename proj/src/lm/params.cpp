#include "forge/lm/params.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "forge/util/error.hpp"

namespace forge::lm {

void ModelConfig::validate() const {
  if (n_layers < 1 || d_model < 1 || n_heads < 1 || d_ff < 1 || vocab_size < 1 || max_seq_len < 1)
    throw UsageError("model dimensions must all be >= 1");
  if (d_model % n_heads != 0) throw UsageError("d_model must be divisible by n_heads");
}

std::string to_json(const ModelConfig& c) {
  nlohmann::ordered_json j{{"n_layers", c.n_layers},     {"d_model", c.d_model},
                           {"n_heads", c.n_heads},       {"d_ff", c.d_ff},
                           {"vocab_size", c.vocab_size}, {"max_seq_len", c.max_seq_len},
                           {"init_seed", c.init_seed}};
  return j.dump();
}

ModelConfig model_config_from_json(const std::string& text) {
  ModelConfig c;
  try {
    const auto j = nlohmann::json::parse(text);
    c.n_layers = j.value("n_layers", c.n_layers);
    c.d_model = j.value("d_model", c.d_model);
    c.n_heads = j.value("n_heads", c.n_heads);
    c.d_ff = j.value("d_ff", c.d_ff);
    c.vocab_size = j.value("vocab_size", c.vocab_size);
    c.max_seq_len = j.value("max_seq_len", c.max_seq_len);
    c.init_seed = j.value("init_seed", c.init_seed);
  } catch (const nlohmann::json::exception& e) {
    throw UsageError(std::string("model config: ") + e.what());
  }
  c.validate();
  return c;
}

ModelConfig load_model_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open model config " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return model_config_from_json(ss.str());
}

const char* slot_name(LayerSlot slot) noexcept {
  switch (slot) {
    case LayerSlot::AttnNorm: return "attn_norm";
    case LayerSlot::Wq: return "W_Q";
    case LayerSlot::Wk: return "W_K";
    case LayerSlot::Wv: return "W_V";
    case LayerSlot::Wo: return "W_O";
    case LayerSlot::MlpNorm: return "mlp_norm";
    case LayerSlot::W1: return "W_1";
    case LayerSlot::W2: return "W_2";
  }
  return "?";
}

std::vector<ParamPath> param_paths(const ModelConfig& c) {
  const Eigen::Index d = c.d_model, ff = c.d_ff;
  std::vector<ParamPath> out;
  out.push_back({kGlobalLayer, "tok_emb", c.vocab_size, d});
  out.push_back({kGlobalLayer, "pos_emb", c.max_seq_len, d});
  for (int l = 0; l < c.n_layers; ++l) {
    for (int s = 0; s < kSlotsPerLayer; ++s) {
      const auto slot = static_cast<LayerSlot>(s);
      Eigen::Index rows = d, cols = d;
      if (slot == LayerSlot::AttnNorm || slot == LayerSlot::MlpNorm) rows = 1;
      if (slot == LayerSlot::W1) cols = ff;
      if (slot == LayerSlot::W2) rows = ff;
      out.push_back({l, slot_name(slot), rows, cols});
    }
  }
  out.push_back({kGlobalLayer, "final_norm", 1, d});
  return out;
}

int layer_of(const ModelConfig& c, std::size_t index) {
  if (index < 2 || index >= final_norm_index(c)) return kGlobalLayer;
  return static_cast<int>((index - 2) / kSlotsPerLayer);
}

}  // namespace forge::lm
