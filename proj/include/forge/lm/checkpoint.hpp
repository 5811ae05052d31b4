#pragma once

#include <filesystem>

#include "forge/lm/params.hpp"
#include "forge/util/error.hpp"

namespace forge::lm {

class CheckpointError : public Error {
 public:
  using Error::Error;
};

/// Writes `<dir>/manifest.json` (config, param paths, byte offsets/lengths) and
/// `<dir>/params.bin` (little-endian float32, param_paths order, row-major).
void save_checkpoint(const std::filesystem::path& dir, const Params<float>& params);
Params<float> load_checkpoint(const std::filesystem::path& dir);

}  // namespace forge::lm
