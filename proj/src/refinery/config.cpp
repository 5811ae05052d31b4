#include "forge/refinery/config.hpp"

#include <fstream>

#include <json.hpp>

#include "forge/util/error.hpp"

namespace forge::refinery {

void RefineryConfig::validate() const {
  if (min_tokens < 0) throw UsageError("min_tokens must be non-negative");
  if (!(min_len_ratio > 0.0 && min_len_ratio <= 1.0))
    throw UsageError("min_len_ratio must lie in (0, 1]");
  if (simhash_bits != 64) throw UsageError("simhash_bits is fixed at 64");
  if (hamming_radius < 0 || hamming_radius >= simhash_bits)
    throw UsageError("hamming_radius must lie in [0, simhash_bits)");
  if (max_conflicts < 0) throw UsageError("max_conflicts must be non-negative");
  if (!(quality_percentile > 0.0 && quality_percentile < 1.0))
    throw UsageError("quality_percentile must lie in (0, 1)");
  if (!(langid_min_prob >= 0.0 && langid_min_prob <= 1.0))
    throw UsageError("langid_min_prob must lie in [0, 1]");
}

RefineryConfig load_refinery_config(std::istream& in) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw UsageError(std::string("refinery config: ") + e.what());
  }
  RefineryConfig c;
  try {
    c.min_tokens = j.value("min_tokens", c.min_tokens);
    c.min_len_ratio = j.value("min_len_ratio", c.min_len_ratio);
    c.simhash_bits = j.value("simhash_bits", c.simhash_bits);
    c.hamming_radius = j.value("hamming_radius", c.hamming_radius);
    c.max_conflicts = j.value("max_conflicts", c.max_conflicts);
    c.quality_percentile = j.value("quality_percentile", c.quality_percentile);
    c.langid_min_prob = j.value("langid_min_prob", c.langid_min_prob);
    c.template_seed = j.value("template_seed", c.template_seed);
    c.strict = j.value("strict", c.strict);
    if (j.contains("per_character_langs"))
      c.per_character_langs = j["per_character_langs"].get<std::set<std::string>>();
    if (j.contains("templates")) c.templates = j["templates"].get<std::vector<std::string>>();
  } catch (const nlohmann::json::exception& e) {
    throw UsageError(std::string("refinery config: ") + e.what());
  }
  c.validate();
  return c;
}

RefineryConfig load_refinery_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open config " + path);
  return load_refinery_config(in);
}

}  // namespace forge::refinery
