#pragma once

#include <cmath>
#include <map>
#include <vector>

#include "forge/lm/params.hpp"
#include "forge/train/schedule.hpp"

namespace forge::train {

/// AdamW moments for the trainable tensors only, keyed by tensor index.
template <typename Scalar>
struct AdamState {
  struct Moments {
    lm::Mat<Scalar> m, v;
  };
  long t = 0;
  std::map<std::size_t, Moments> moments;
};

/// Decoupled-weight-decay Adam step on tensors with trainable[i] set; every
/// other tensor is left untouched, bit for bit.
template <typename Scalar>
void optimizer_step(lm::Params<Scalar>& params, const lm::GradBuffers<Scalar>& grads,
                    AdamState<Scalar>& state, const std::vector<bool>& trainable, double lr,
                    const TrainConfig& config) {
  bool any = false;
  for (bool b : trainable) any = any || b;
  if (!any) return;
  ++state.t;
  const double bc1 = 1.0 - std::pow(config.beta1, static_cast<double>(state.t));
  const double bc2 = 1.0 - std::pow(config.beta2, static_cast<double>(state.t));
  const auto b1 = static_cast<Scalar>(config.beta1), b2 = static_cast<Scalar>(config.beta2);
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (!trainable[i]) continue;
    auto& p = params[i];
    const auto& g = grads[i];
    auto [it, fresh] = state.moments.try_emplace(i);
    auto& mom = it->second;
    if (fresh) {
      mom.m = lm::Mat<Scalar>::Zero(p.rows(), p.cols());
      mom.v = lm::Mat<Scalar>::Zero(p.rows(), p.cols());
    }
    mom.m = b1 * mom.m + (Scalar(1) - b1) * g;
    mom.v = b2 * mom.v + (Scalar(1) - b2) * g.cwiseProduct(g);
    if (config.weight_decay != 0.0) p *= static_cast<Scalar>(1.0 - lr * config.weight_decay);
    const auto step = static_cast<Scalar>(lr / bc1);
    const auto inv_bc2 = static_cast<Scalar>(1.0 / std::sqrt(bc2));
    const auto eps = static_cast<Scalar>(config.eps);
    p.array() -= step * mom.m.array() / (mom.v.array().sqrt() * inv_bc2 + eps);
  }
}

}  // namespace forge::train
