#pragma once

#include <vector>

#include "forge/lm/batch.hpp"
#include "forge/lm/params.hpp"

namespace forge::lm {

/// Deterministic seeded init: weight matrices ~ U(+-1/sqrt(fan_in)), norm gains
/// exactly 1, embeddings ~ U(+-kEmbeddingScale).
template <typename Scalar>
Params<Scalar> init_params(const ModelConfig& config);

inline constexpr double kEmbeddingScale = 0.1;
inline constexpr double kNormEps = 1e-5;

/// Attention probabilities of one forward pass, [batch row][layer][head] -> T x T.
template <typename Scalar>
using AttentionTrace = std::vector<std::vector<std::vector<Mat<Scalar>>>>;

/// Logits per batch row, each T x V.
template <typename Scalar>
std::vector<Mat<Scalar>> forward(const Params<Scalar>& params, const Batch& batch,
                                 AttentionTrace<Scalar>* attention = nullptr);

/// Mean masked next-token cross-entropy without gradients.
template <typename Scalar>
Scalar masked_loss(const Params<Scalar>& params, const Batch& batch);

/// Computes the mean masked cross-entropy and ADDS loss_scale * d(loss)/d(theta)
/// into `grads` for every tensor. Returns the unscaled loss.
template <typename Scalar>
Scalar accumulate_loss_and_backward(const Params<Scalar>& params, const Batch& batch,
                                    GradBuffers<Scalar>& grads, Scalar loss_scale = Scalar(1));

template <typename Scalar>
struct LossAndGrads {
  Scalar loss;
  GradBuffers<Scalar> grads;
};

template <typename Scalar>
LossAndGrads<Scalar> loss_and_backward(const Params<Scalar>& params, const Batch& batch);

/// Greedy continuation of `prompt` by `steps` tokens (full recompute per token).
template <typename Scalar>
std::vector<std::int32_t> greedy_decode(const Params<Scalar>& params,
                                        const std::vector<std::int32_t>& prompt, int steps);

void validate_batch(const ModelConfig& config, const Batch& batch);

}  // namespace forge::lm
