#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "forge/util/error.hpp"

namespace forge::lm {

using TokenMatrix = Eigen::Array<std::int32_t, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MaskMatrix = Eigen::Array<std::uint8_t, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Token ids [B x T] with a loss mask: mask(b, t) = 1 means token t is a
/// prediction target (scored from the logits at t - 1). Column 0 is never
/// scored.
struct Batch {
  TokenMatrix ids;
  MaskMatrix mask;

  Eigen::Index rows() const noexcept { return ids.rows(); }
  Eigen::Index cols() const noexcept { return ids.cols(); }
  std::size_t scored_positions() const;
};

class AllMasked : public Error {
 public:
  AllMasked() : Error("batch has no masked-in positions") {}
};

class InvalidBatch : public Error {
 public:
  using Error::Error;
};

/// One prompt/response example; the response is the supervised span.
struct Sequence {
  std::vector<std::int32_t> prompt;
  std::vector<std::int32_t> response;

  bool operator==(const Sequence&) const = default;
};

/// Packs sequences into one right-padded batch; the mask covers exactly the
/// response tokens.
Batch make_batch(const std::vector<Sequence>& sequences, std::int32_t pad_id);

}  // namespace forge::lm
