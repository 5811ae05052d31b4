#include "forge/lm/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace forge::lm {

namespace {

static_assert(sizeof(float) == 4);

std::uint32_t to_le(std::uint32_t v) {
  if constexpr (std::endian::native == std::endian::big)
    return ((v & 0xffU) << 24) | ((v & 0xff00U) << 8) | ((v >> 8) & 0xff00U) | (v >> 24);
  return v;
}

}  // namespace

void save_checkpoint(const std::filesystem::path& dir, const Params<float>& params) {
  std::filesystem::create_directories(dir);
  const auto paths = param_paths(params.config);
  if (paths.size() != params.size()) throw CheckpointError("tensor count does not match config");

  nlohmann::ordered_json manifest;
  manifest["format"] = "forge-tinylm-checkpoint";
  manifest["dtype"] = "float32-le";
  manifest["config"] = nlohmann::ordered_json::parse(to_json(params.config));
  manifest["tensors"] = nlohmann::ordered_json::array();

  std::ofstream blob(dir / "params.bin", std::ios::binary | std::ios::trunc);
  if (!blob) throw CheckpointError("cannot write " + (dir / "params.bin").string());
  std::uint64_t offset = 0;
  for (std::size_t i = 0; i < paths.size(); ++i) {
    const auto& t = params[i];
    if (t.rows() != paths[i].rows || t.cols() != paths[i].cols)
      throw CheckpointError("tensor " + paths[i].name + " has the wrong shape");
    const std::uint64_t length = 4 * static_cast<std::uint64_t>(t.size());
    for (Eigen::Index k = 0; k < t.size(); ++k) {
      const std::uint32_t le = to_le(std::bit_cast<std::uint32_t>(t.data()[k]));
      blob.write(reinterpret_cast<const char*>(&le), 4);
    }
    manifest["tensors"].push_back({{"layer", paths[i].layer},
                                   {"name", paths[i].name},
                                   {"shape", {paths[i].rows, paths[i].cols}},
                                   {"offset", offset},
                                   {"length", length}});
    offset += length;
  }
  if (!blob) throw CheckpointError("short write to params.bin");
  std::ofstream(dir / "manifest.json") << manifest.dump(2) << "\n";
}

Params<float> load_checkpoint(const std::filesystem::path& dir) {
  std::ifstream mf(dir / "manifest.json");
  if (!mf) throw CheckpointError("cannot open " + (dir / "manifest.json").string());
  nlohmann::json manifest;
  try {
    manifest = nlohmann::json::parse(mf);
  } catch (const nlohmann::json::exception& e) {
    throw CheckpointError(std::string("manifest: ") + e.what());
  }
  const ModelConfig config = model_config_from_json(manifest.at("config").dump());
  const auto paths = param_paths(config);
  const auto& tensors = manifest.at("tensors");
  if (tensors.size() != paths.size()) throw CheckpointError("manifest tensor count mismatch");

  std::ifstream blob(dir / "params.bin", std::ios::binary);
  if (!blob) throw CheckpointError("cannot open " + (dir / "params.bin").string());
  std::stringstream ss;
  ss << blob.rdbuf();
  const std::string bytes = ss.str();

  auto params = Params<float>::zeros(config);
  for (std::size_t i = 0; i < paths.size(); ++i) {
    const auto& entry = tensors[i];
    if (entry.at("name").get<std::string>() != paths[i].name ||
        entry.at("layer").get<int>() != paths[i].layer)
      throw CheckpointError("manifest path mismatch at tensor " + std::to_string(i));
    const auto offset = entry.at("offset").get<std::uint64_t>();
    const auto length = entry.at("length").get<std::uint64_t>();
    auto& t = params[i];
    if (length != 4 * static_cast<std::uint64_t>(t.size()) || offset + length > bytes.size())
      throw CheckpointError("bad extent for tensor " + paths[i].name);
    for (Eigen::Index k = 0; k < t.size(); ++k) {
      std::uint32_t le;
      std::memcpy(&le, bytes.data() + offset + 4 * static_cast<std::uint64_t>(k), 4);
      t.data()[k] = std::bit_cast<float>(to_le(le));
    }
  }
  return params;
}

}  // namespace forge::lm
