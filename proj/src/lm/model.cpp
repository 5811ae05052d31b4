#include "forge/lm/model.hpp"

#include <cmath>
#include <limits>
#include <random>

namespace forge::lm {

namespace {

template <typename S>
using Vec = Eigen::Matrix<S, Eigen::Dynamic, 1>;

template <typename S>
struct LayerCache {
  Mat<S> x_in, h1, q, k, v, o, x_mid, h2, u, g;
  Vec<S> r1, r2;
  std::vector<Mat<S>> att;
};

template <typename S>
struct RowCache {
  std::vector<LayerCache<S>> layers;
  Mat<S> x_out, hf, logits;
  Vec<S> rf;
};

template <typename S>
void rmsnorm(const Mat<S>& x, const Mat<S>& gain, Vec<S>& r, Mat<S>& y) {
  const S d = static_cast<S>(x.cols());
  r = ((x.rowwise().squaredNorm() / d).array() + static_cast<S>(kNormEps)).rsqrt().matrix();
  y.noalias() = r.asDiagonal() * x * gain.row(0).transpose().asDiagonal();
}

/// Returns dx; accumulates into dgain.
template <typename S>
Mat<S> rmsnorm_backward(const Mat<S>& dy, const Mat<S>& x, const Vec<S>& r, const Mat<S>& gain,
                        Mat<S>& dgain) {
  const S d = static_cast<S>(x.cols());
  const Mat<S> xhat = r.asDiagonal() * x;
  dgain.row(0).noalias() += dy.cwiseProduct(xhat).colwise().sum();
  const Mat<S> dxhat = dy * gain.row(0).transpose().asDiagonal();
  const Vec<S> dot = dxhat.cwiseProduct(x).rowwise().sum();
  const Vec<S> coeff = (r.array().cube() * dot.array() / d).matrix();
  return r.asDiagonal() * dxhat - coeff.asDiagonal() * x;
}

template <typename S>
S gelu(S u) {
  return S(0.5) * u * (S(1) + std::erf(u * static_cast<S>(M_SQRT1_2)));
}

template <typename S>
S gelu_grad(S u) {
  const S cdf = S(0.5) * (S(1) + std::erf(u * static_cast<S>(M_SQRT1_2)));
  const S pdf = std::exp(S(-0.5) * u * u) * static_cast<S>(0.3989422804014327);
  return cdf + u * pdf;
}

/// Causal row softmax of scores in place.
template <typename S>
void causal_softmax(Mat<S>& s) {
  const Eigen::Index t = s.rows();
  for (Eigen::Index i = 0; i < t; ++i) {
    S mx = s(i, 0);
    for (Eigen::Index j = 1; j <= i; ++j) mx = std::max(mx, s(i, j));
    S sum = 0;
    for (Eigen::Index j = 0; j <= i; ++j) {
      s(i, j) = std::exp(s(i, j) - mx);
      sum += s(i, j);
    }
    const S inv = S(1) / sum;
    for (Eigen::Index j = 0; j <= i; ++j) s(i, j) *= inv;
    for (Eigen::Index j = i + 1; j < t; ++j) s(i, j) = 0;
  }
}

template <typename S>
void forward_row(const Params<S>& p, const Batch& batch, Eigen::Index b, RowCache<S>& c) {
  const auto& cfg = p.config;
  const Eigen::Index t_len = batch.cols();
  const int dh = cfg.head_dim();
  const S scale = S(1) / std::sqrt(static_cast<S>(dh));

  Mat<S> x(t_len, cfg.d_model);
  for (Eigen::Index t = 0; t < t_len; ++t)
    x.row(t) = p.tok_emb().row(batch.ids(b, t)) + p.pos_emb().row(t);

  c.layers.resize(static_cast<std::size_t>(cfg.n_layers));
  for (int l = 0; l < cfg.n_layers; ++l) {
    auto& lc = c.layers[static_cast<std::size_t>(l)];
    lc.x_in = x;
    rmsnorm(lc.x_in, p.layer(l, LayerSlot::AttnNorm), lc.r1, lc.h1);
    lc.q.noalias() = lc.h1 * p.layer(l, LayerSlot::Wq);
    lc.k.noalias() = lc.h1 * p.layer(l, LayerSlot::Wk);
    lc.v.noalias() = lc.h1 * p.layer(l, LayerSlot::Wv);
    lc.o.resize(t_len, cfg.d_model);
    lc.att.resize(static_cast<std::size_t>(cfg.n_heads));
    for (int h = 0; h < cfg.n_heads; ++h) {
      auto& a = lc.att[static_cast<std::size_t>(h)];
      a.noalias() = lc.q.middleCols(h * dh, dh) * lc.k.middleCols(h * dh, dh).transpose();
      a *= scale;
      causal_softmax(a);
      lc.o.middleCols(h * dh, dh).noalias() = a * lc.v.middleCols(h * dh, dh);
    }
    lc.x_mid = lc.x_in;
    lc.x_mid.noalias() += lc.o * p.layer(l, LayerSlot::Wo);
    rmsnorm(lc.x_mid, p.layer(l, LayerSlot::MlpNorm), lc.r2, lc.h2);
    lc.u.noalias() = lc.h2 * p.layer(l, LayerSlot::W1);
    lc.g = lc.u.unaryExpr([](S v) { return gelu(v); });
    x = lc.x_mid;
    x.noalias() += lc.g * p.layer(l, LayerSlot::W2);
  }
  c.x_out = std::move(x);
  rmsnorm(c.x_out, p.final_norm(), c.rf, c.hf);
  c.logits.noalias() = c.hf * p.tok_emb().transpose();
}

/// Log-softmax of one logits row evaluated at `target`, and optionally the
/// softmax probabilities.
template <typename S>
S log_prob(const Mat<S>& logits, Eigen::Index row, std::int32_t target, Vec<S>* probs) {
  const auto r = logits.row(row);
  const S mx = r.maxCoeff();
  const auto shifted = (r.array() - mx).eval();
  const S sum = shifted.exp().sum();
  const S lse = std::log(sum);
  if (probs) *probs = (shifted - lse).exp().transpose().matrix();
  return shifted(target) - lse;
}

template <typename S>
void backward_row(const Params<S>& p, const Batch& batch, Eigen::Index b, const RowCache<S>& c,
                  S weight, GradBuffers<S>& g) {
  const auto& cfg = p.config;
  const Eigen::Index t_len = batch.cols();
  const int dh = cfg.head_dim();
  const S scale = S(1) / std::sqrt(static_cast<S>(dh));

  Mat<S> dlogits = Mat<S>::Zero(t_len, cfg.vocab_size);
  Vec<S> probs;
  for (Eigen::Index t = 1; t < t_len; ++t) {
    if (!batch.mask(b, t)) continue;
    const std::int32_t target = batch.ids(b, t);
    log_prob(c.logits, t - 1, target, &probs);
    probs(target) -= S(1);
    dlogits.row(t - 1) = weight * probs.transpose();
  }

  g.tok_emb().noalias() += dlogits.transpose() * c.hf;
  const Mat<S> dhf = dlogits * p.tok_emb();
  Mat<S> dx = rmsnorm_backward(dhf, c.x_out, c.rf, p.final_norm(), g.final_norm());

  for (int l = cfg.n_layers - 1; l >= 0; --l) {
    const auto& lc = c.layers[static_cast<std::size_t>(l)];
    // MLP block.
    g.layer(l, LayerSlot::W2).noalias() += lc.g.transpose() * dx;
    Mat<S> du = dx * p.layer(l, LayerSlot::W2).transpose();
    du.array() *= lc.u.unaryExpr([](S v) { return gelu_grad(v); }).array();
    g.layer(l, LayerSlot::W1).noalias() += lc.h2.transpose() * du;
    const Mat<S> dh2 = du * p.layer(l, LayerSlot::W1).transpose();
    Mat<S> dx_mid = dx + rmsnorm_backward(dh2, lc.x_mid, lc.r2, p.layer(l, LayerSlot::MlpNorm),
                                          g.layer(l, LayerSlot::MlpNorm));
    // Attention block.
    g.layer(l, LayerSlot::Wo).noalias() += lc.o.transpose() * dx_mid;
    const Mat<S> d_o = dx_mid * p.layer(l, LayerSlot::Wo).transpose();
    Mat<S> dq(t_len, cfg.d_model), dk(t_len, cfg.d_model), dv(t_len, cfg.d_model);
    for (int h = 0; h < cfg.n_heads; ++h) {
      const auto& a = lc.att[static_cast<std::size_t>(h)];
      const auto doh = d_o.middleCols(h * dh, dh);
      const Mat<S> da = doh * lc.v.middleCols(h * dh, dh).transpose();
      dv.middleCols(h * dh, dh).noalias() = a.transpose() * doh;
      const Vec<S> rowdot = a.cwiseProduct(da).rowwise().sum();
      Mat<S> ds = a.cwiseProduct(da - rowdot.replicate(1, t_len));
      ds *= scale;
      dq.middleCols(h * dh, dh).noalias() = ds * lc.k.middleCols(h * dh, dh);
      dk.middleCols(h * dh, dh).noalias() = ds.transpose() * lc.q.middleCols(h * dh, dh);
    }
    g.layer(l, LayerSlot::Wq).noalias() += lc.h1.transpose() * dq;
    g.layer(l, LayerSlot::Wk).noalias() += lc.h1.transpose() * dk;
    g.layer(l, LayerSlot::Wv).noalias() += lc.h1.transpose() * dv;
    Mat<S> dh1 = dq * p.layer(l, LayerSlot::Wq).transpose();
    dh1.noalias() += dk * p.layer(l, LayerSlot::Wk).transpose();
    dh1.noalias() += dv * p.layer(l, LayerSlot::Wv).transpose();
    dx = dx_mid + rmsnorm_backward(dh1, lc.x_in, lc.r1, p.layer(l, LayerSlot::AttnNorm),
                                   g.layer(l, LayerSlot::AttnNorm));
  }

  for (Eigen::Index t = 0; t < t_len; ++t) {
    g.tok_emb().row(batch.ids(b, t)) += dx.row(t);
    g.pos_emb().row(t) += dx.row(t);
  }
}

bool row_scored(const Batch& batch, Eigen::Index b) {
  for (Eigen::Index t = 1; t < batch.cols(); ++t)
    if (batch.mask(b, t)) return true;
  return false;
}

}  // namespace

std::size_t Batch::scored_positions() const {
  std::size_t n = 0;
  for (Eigen::Index b = 0; b < rows(); ++b)
    for (Eigen::Index t = 1; t < cols(); ++t) n += mask(b, t) ? 1 : 0;
  return n;
}

Batch make_batch(const std::vector<Sequence>& sequences, std::int32_t pad_id) {
  std::size_t width = 0;
  for (const auto& s : sequences) width = std::max(width, s.prompt.size() + s.response.size());
  Batch batch;
  const auto rows = static_cast<Eigen::Index>(sequences.size());
  const auto cols = static_cast<Eigen::Index>(width);
  batch.ids = TokenMatrix::Constant(rows, cols, pad_id);
  batch.mask = MaskMatrix::Zero(rows, cols);
  for (Eigen::Index b = 0; b < rows; ++b) {
    const auto& s = sequences[static_cast<std::size_t>(b)];
    Eigen::Index t = 0;
    for (auto id : s.prompt) batch.ids(b, t++) = id;
    for (auto id : s.response) {
      batch.ids(b, t) = id;
      batch.mask(b, t) = 1;
      ++t;
    }
  }
  return batch;
}

void validate_batch(const ModelConfig& config, const Batch& batch) {
  if (batch.mask.rows() != batch.ids.rows() || batch.mask.cols() != batch.ids.cols())
    throw InvalidBatch("mask shape differs from ids shape");
  if (batch.cols() > config.max_seq_len)
    throw InvalidBatch("sequence length " + std::to_string(batch.cols()) + " exceeds max_seq_len");
  if (batch.rows() == 0 || batch.cols() == 0) throw InvalidBatch("empty batch");
  if ((batch.ids < 0).any() || (batch.ids >= config.vocab_size).any())
    throw InvalidBatch("token id out of vocabulary range");
}

template <typename S>
Params<S> init_params(const ModelConfig& config) {
  config.validate();
  std::mt19937_64 rng(config.init_seed);
  // Portable uniform in [-1, 1) from the top 53 bits.
  auto uniform = [&rng]() {
    return static_cast<double>(rng() >> 11) * 0x1.0p-52 - 1.0;
  };
  auto p = Params<S>::zeros(config);
  const auto paths = param_paths(config);
  for (std::size_t i = 0; i < paths.size(); ++i) {
    auto& t = p[i];
    const auto& name = paths[i].name;
    if (name == "attn_norm" || name == "mlp_norm" || name == "final_norm") {
      t.setOnes();
      continue;
    }
    const double bound = (name == "tok_emb" || name == "pos_emb")
                             ? kEmbeddingScale
                             : 1.0 / std::sqrt(static_cast<double>(paths[i].rows));
    for (Eigen::Index k = 0; k < t.size(); ++k) t.data()[k] = static_cast<S>(bound * uniform());
  }
  return p;
}

template <typename S>
std::vector<Mat<S>> forward(const Params<S>& params, const Batch& batch,
                            AttentionTrace<S>* attention) {
  validate_batch(params.config, batch);
  std::vector<Mat<S>> out;
  out.reserve(static_cast<std::size_t>(batch.rows()));
  if (attention) attention->clear();
  RowCache<S> cache;
  for (Eigen::Index b = 0; b < batch.rows(); ++b) {
    forward_row(params, batch, b, cache);
    out.push_back(std::move(cache.logits));
    if (attention) {
      auto& rows = attention->emplace_back();
      for (auto& lc : cache.layers) rows.push_back(lc.att);
    }
  }
  return out;
}

template <typename S>
S masked_loss(const Params<S>& params, const Batch& batch) {
  validate_batch(params.config, batch);
  const std::size_t n = batch.scored_positions();
  if (n == 0) throw AllMasked();
  RowCache<S> cache;
  double total = 0;
  for (Eigen::Index b = 0; b < batch.rows(); ++b) {
    if (!row_scored(batch, b)) continue;
    forward_row(params, batch, b, cache);
    for (Eigen::Index t = 1; t < batch.cols(); ++t)
      if (batch.mask(b, t))
        total -= static_cast<double>(log_prob<S>(cache.logits, t - 1, batch.ids(b, t), nullptr));
  }
  return static_cast<S>(total / static_cast<double>(n));
}

template <typename S>
S accumulate_loss_and_backward(const Params<S>& params, const Batch& batch, GradBuffers<S>& grads,
                               S loss_scale) {
  validate_batch(params.config, batch);
  const std::size_t n = batch.scored_positions();
  if (n == 0) throw AllMasked();
  const S weight = loss_scale / static_cast<S>(n);
  RowCache<S> cache;
  double total = 0;
  for (Eigen::Index b = 0; b < batch.rows(); ++b) {
    if (!row_scored(batch, b)) continue;
    forward_row(params, batch, b, cache);
    for (Eigen::Index t = 1; t < batch.cols(); ++t)
      if (batch.mask(b, t))
        total -= static_cast<double>(log_prob<S>(cache.logits, t - 1, batch.ids(b, t), nullptr));
    backward_row(params, batch, b, cache, weight, grads);
  }
  return static_cast<S>(total / static_cast<double>(n));
}

template <typename S>
LossAndGrads<S> loss_and_backward(const Params<S>& params, const Batch& batch) {
  auto grads = GradBuffers<S>::zeros(params.config);
  const S loss = accumulate_loss_and_backward(params, batch, grads);
  return {loss, std::move(grads)};
}

template <typename S>
std::vector<std::int32_t> greedy_decode(const Params<S>& params,
                                        const std::vector<std::int32_t>& prompt, int steps) {
  std::vector<std::int32_t> seq = prompt;
  std::vector<std::int32_t> out;
  for (int i = 0; i < steps && static_cast<int>(seq.size()) < params.config.max_seq_len; ++i) {
    Batch b;
    b.ids = TokenMatrix(1, static_cast<Eigen::Index>(seq.size()));
    for (std::size_t t = 0; t < seq.size(); ++t) b.ids(0, static_cast<Eigen::Index>(t)) = seq[t];
    b.mask = MaskMatrix::Zero(1, b.ids.cols());
    const auto logits = forward(params, b);
    Eigen::Index best = 0;
    logits[0].row(logits[0].rows() - 1).maxCoeff(&best);
    seq.push_back(static_cast<std::int32_t>(best));
    out.push_back(static_cast<std::int32_t>(best));
  }
  return out;
}

#define FORGE_INSTANTIATE(S)                                                                   \
  template Params<S> init_params<S>(const ModelConfig&);                                       \
  template std::vector<Mat<S>> forward<S>(const Params<S>&, const Batch&, AttentionTrace<S>*); \
  template S masked_loss<S>(const Params<S>&, const Batch&);                                   \
  template S accumulate_loss_and_backward<S>(const Params<S>&, const Batch&, GradBuffers<S>&,  \
                                             S);                                               \
  template LossAndGrads<S> loss_and_backward<S>(const Params<S>&, const Batch&);               \
  template std::vector<std::int32_t> greedy_decode<S>(const Params<S>&,                        \
                                                      const std::vector<std::int32_t>&, int);

FORGE_INSTANTIATE(float)
FORGE_INSTANTIATE(double)

#undef FORGE_INSTANTIATE

}  // namespace forge::lm
