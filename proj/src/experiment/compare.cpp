#include "forge/experiment/compare.hpp"

#include <algorithm>
#include <cstdio>
#include <set>

#include <json.hpp>

#include "forge/lm/checkpoint.hpp"
#include "forge/lm/model.hpp"
#include "forge/util/hash.hpp"

namespace forge::experiment {

ComparisonTable compare(const lm::Params<float>& start,
                        const std::vector<lm::Sequence>& translation_train,
                        const std::vector<lm::Sequence>& translation_eval,
                        const std::vector<lm::Sequence>& general_eval,
                        const std::vector<ExperimentRow>& rows) {
  std::set<std::string> labels;
  for (const auto& r : rows)
    if (!labels.insert(r.label).second) throw UsageError("duplicate row label '" + r.label + "'");

  ComparisonTable table;
  table.start_translation = synth::evaluate(start, translation_eval, "translation");
  table.start_general = synth::evaluate(start, general_eval, "general");
  for (const auto& row : rows) {
    try {
      lm::Params<float> params = start;
      const auto log = train::run(row.mode, params, translation_train, row.config,
                                  synth::SynthVocab::kPad);
      ComparisonRow out;
      out.label = row.label;
      out.mode = train::mode_name(row.mode);
      out.translation = synth::evaluate(params, translation_eval, "translation");
      out.general = synth::evaluate(params, general_eval, "general");
      out.delta_general_ce = out.general.mean_ce - table.start_general.mean_ce;
      out.final_loss = log.steps.empty() ? 0.0 : log.steps.back().loss;
      table.rows.push_back(std::move(out));
    } catch (const UsageError& e) {
      throw UsageError(row.label + ": " + e.what());
    } catch (const Error& e) {
      throw Error(row.label + ": " + e.what());
    }
  }
  return table;
}

std::string ComparisonTable::to_csv() const {
  std::string out = "label,mode,translation_ce,translation_em,general_ce,general_em,delta_general_ce\n";
  char buf[512];
  std::snprintf(buf, sizeof buf, "start,none,%.9g,%.9g,%.9g,%.9g,0\n", start_translation.mean_ce,
                start_translation.exact_match, start_general.mean_ce, start_general.exact_match);
  out += buf;
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof buf, "%s,%s,%.9g,%.9g,%.9g,%.9g,%.9g\n", r.label.c_str(),
                  r.mode.c_str(), r.translation.mean_ce, r.translation.exact_match,
                  r.general.mean_ce, r.general.exact_match, r.delta_general_ce);
    out += buf;
  }
  return out;
}

std::string ComparisonTable::to_json() const {
  auto eval = [](const synth::EvalResult& e) {
    return nlohmann::ordered_json{{"task", e.task},
                                  {"mean_ce", e.mean_ce},
                                  {"exact_match", e.exact_match},
                                  {"samples", e.samples}};
  };
  nlohmann::ordered_json j;
  j["start"] = {{"translation", eval(start_translation)}, {"general", eval(start_general)}};
  j["rows"] = nlohmann::ordered_json::array();
  for (const auto& r : rows)
    j["rows"].push_back({{"label", r.label},
                         {"mode", r.mode},
                         {"translation", eval(r.translation)},
                         {"general", eval(r.general)},
                         {"delta_general_ce", r.delta_general_ce},
                         {"final_loss", r.final_loss}});
  return j.dump(2);
}

lm::Params<float> pretrain_start_model(const lm::ModelConfig& model,
                                       const std::vector<lm::Sequence>& general_train,
                                       const train::TrainConfig& config) {
  auto params = lm::init_params<float>(model);
  train::run(train::FullFineTune{}, params, general_train, config, synth::SynthVocab::kPad);
  return params;
}

ReferenceSetup reference_setup(std::uint64_t seed) {
  ReferenceSetup s;
  s.model.n_layers = 8;
  s.model.d_model = 64;
  s.model.n_heads = 4;
  s.model.d_ff = 128;
  s.model.vocab_size = 64;
  s.model.max_seq_len = 32;
  s.model.init_seed = seed;

  const auto lang = synth::SynthLangSpec::seeded(s.model.vocab_size, hash64(seed, 1));
  s.translation = synth::gen_translation_corpus(lang, 840, hash64(seed, 2));
  s.general = synth::gen_general_corpus(s.model.vocab_size, 1260, hash64(seed, 3));

  s.pretrain.lr_max = 3e-3;
  s.pretrain.lr_min = 3e-4;
  s.pretrain.warmup_ratio = 0.03;
  s.pretrain.epochs = 15;
  s.pretrain.batch_size = 8;
  s.pretrain.grad_accum = 1;
  s.pretrain.seed = hash64(seed, 4);

  s.tune = s.pretrain;
  s.tune.lr_max = 2e-3;
  s.tune.lr_min = 4e-4;
  s.tune.epochs = 1;
  s.tune.seed = hash64(seed, 5);
  return s;
}

namespace {

train::TrainConfig train_config_from(const nlohmann::json& j, std::uint64_t seed) {
  nlohmann::json copy = j.is_object() ? j : nlohmann::json::object();
  if (!copy.contains("seed")) copy["seed"] = seed;
  return train::train_config_from_json(copy.dump());
}

}  // namespace

ExperimentSpec load_experiment_spec(const std::string& text, const std::filesystem::path& base) {
  ExperimentSpec spec;
  try {
    const auto j = nlohmann::json::parse(text);
    auto path = [&](const std::string& key) {
      std::filesystem::path p = j.at(key).get<std::string>();
      return p.is_absolute() ? p : base / p;
    };
    spec.seed = j.value("seed", std::uint64_t{0});
    if (j.at("model_config").is_string())
      spec.model = lm::load_model_config_file(path("model_config").string());
    else
      spec.model = lm::model_config_from_json(j.at("model_config").dump());
    if (j.contains("start_checkpoint")) spec.start_checkpoint = path("start_checkpoint");
    if (j.contains("general_data")) spec.general_data = path("general_data");
    if (!spec.start_checkpoint && !spec.general_data)
      throw UsageError("experiment needs start_checkpoint or general_data");
    spec.translation_data = path("translation_data");
    spec.translation_eval = path("translation_eval");
    spec.general_eval = path("general_eval");
    spec.output_dir = path("output_dir");
    for (const auto& p : {spec.translation_data, spec.translation_eval, spec.general_eval})
      if (!std::filesystem::exists(p)) throw UsageError("experiment spec: missing " + p.string());
    for (const auto& p : {spec.start_checkpoint, spec.general_data})
      if (p && !std::filesystem::exists(*p)) throw UsageError("experiment spec: missing " + p->string());
    spec.pretrain = train_config_from(j.value("pretrain", nlohmann::json::object()), spec.seed);
    for (const auto& r : j.at("rows")) {
      const auto skip = r.value("skip", std::set<int>{});
      ExperimentRow row;
      row.label = r.at("label").get<std::string>();
      // Ablation rows written for deeper models cap the top block at what is
      // left above the bottom block.
      const int k = std::min(r.value("k", 0), spec.model.n_layers);
      const int m = std::min(r.value("m", 0), spec.model.n_layers - k);
      row.mode = train::parse_mode(r.at("mode").get<std::string>(), spec.model.n_layers, k, m, skip);
      row.config = train_config_from(r.value("train", nlohmann::json::object()), spec.seed);
      spec.rows.push_back(std::move(row));
    }
  } catch (const nlohmann::json::exception& e) {
    throw UsageError(std::string("experiment spec: ") + e.what());
  }
  return spec;
}

}  // namespace forge::experiment
