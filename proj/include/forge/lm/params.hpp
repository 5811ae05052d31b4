#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "forge/lm/config.hpp"
#include "forge/util/hash.hpp"

namespace forge::lm {

template <typename Scalar>
using Mat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Tensor slots inside one transformer layer, in enumeration order.
enum class LayerSlot : int { AttnNorm, Wq, Wk, Wv, Wo, MlpNorm, W1, W2 };
inline constexpr int kSlotsPerLayer = 8;
inline constexpr int kGlobalTensors = 3;  // tok_emb, pos_emb, final_norm

inline constexpr int kGlobalLayer = -1;

struct ParamPath {
  int layer = kGlobalLayer;  // kGlobalLayer for embeddings and the final norm
  std::string name;
  Eigen::Index rows = 0;
  Eigen::Index cols = 0;

  bool operator==(const ParamPath&) const = default;
};

/// Stable enumeration: tok_emb, pos_emb, then per layer attn_norm, W_Q, W_K,
/// W_V, W_O, mlp_norm, W_1, W_2, then final_norm. The output head is tied to
/// tok_emb and has no tensor of its own.
std::vector<ParamPath> param_paths(const ModelConfig& config);

const char* slot_name(LayerSlot slot) noexcept;

inline std::size_t tok_emb_index() { return 0; }
inline std::size_t pos_emb_index() { return 1; }
inline std::size_t layer_index(int layer, LayerSlot slot) {
  return 2 + static_cast<std::size_t>(layer) * kSlotsPerLayer + static_cast<std::size_t>(slot);
}
inline std::size_t final_norm_index(const ModelConfig& c) {
  return 2 + static_cast<std::size_t>(c.n_layers) * kSlotsPerLayer;
}
/// Layer owning tensor `index`, or kGlobalLayer.
int layer_of(const ModelConfig& c, std::size_t index);

/// All model tensors in param_paths order. Used both for parameters and for
/// gradient buffers, which mirror the parameter shapes exactly.
template <typename Scalar>
struct TensorSet {
  ModelConfig config;
  std::vector<Mat<Scalar>> tensors;

  static TensorSet zeros(const ModelConfig& config) {
    TensorSet t;
    t.config = config;
    for (const auto& p : param_paths(config)) t.tensors.push_back(Mat<Scalar>::Zero(p.rows, p.cols));
    return t;
  }

  Mat<Scalar>& operator[](std::size_t i) { return tensors[i]; }
  const Mat<Scalar>& operator[](std::size_t i) const { return tensors[i]; }
  std::size_t size() const noexcept { return tensors.size(); }

  Mat<Scalar>& tok_emb() { return tensors[tok_emb_index()]; }
  const Mat<Scalar>& tok_emb() const { return tensors[tok_emb_index()]; }
  Mat<Scalar>& pos_emb() { return tensors[pos_emb_index()]; }
  const Mat<Scalar>& pos_emb() const { return tensors[pos_emb_index()]; }
  Mat<Scalar>& layer(int l, LayerSlot s) { return tensors[layer_index(l, s)]; }
  const Mat<Scalar>& layer(int l, LayerSlot s) const { return tensors[layer_index(l, s)]; }
  Mat<Scalar>& final_norm() { return tensors[final_norm_index(config)]; }
  const Mat<Scalar>& final_norm() const { return tensors[final_norm_index(config)]; }

  void set_zero() {
    for (auto& t : tensors) t.setZero();
  }

  template <typename Other>
  TensorSet<Other> cast() const {
    TensorSet<Other> out;
    out.config = config;
    for (const auto& t : tensors) out.tensors.push_back(t.template cast<Other>());
    return out;
  }

  bool operator==(const TensorSet& other) const {
    if (!(config == other.config) || tensors.size() != other.tensors.size()) return false;
    for (std::size_t i = 0; i < tensors.size(); ++i)
      if (tensors[i].rows() != other.tensors[i].rows() ||
          tensors[i].cols() != other.tensors[i].cols() || tensors[i] != other.tensors[i])
        return false;
    return true;
  }
};

template <typename Scalar>
using Params = TensorSet<Scalar>;
template <typename Scalar>
using GradBuffers = TensorSet<Scalar>;

/// FNV-1a over the raw bytes of one tensor.
template <typename Derived>
std::uint64_t tensor_hash(const Eigen::DenseBase<Derived>& m) {
  const auto& d = m.derived();
  const auto* bytes = reinterpret_cast<const std::byte*>(d.data());
  return fnv1a64(std::span<const std::byte>(bytes, sizeof(typename Derived::Scalar) * d.size()));
}

template <typename Scalar>
std::vector<std::uint64_t> tensor_hashes(const TensorSet<Scalar>& set) {
  std::vector<std::uint64_t> out;
  out.reserve(set.size());
  for (const auto& t : set.tensors) out.push_back(tensor_hash(t));
  return out;
}

}  // namespace forge::lm
