// forge: command-line entry point for the refinery, trainer and analysis tools.
#include <chrono>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "forge/corpus/codec.hpp"
#include "forge/experiment/compare.hpp"
#include "forge/lm/checkpoint.hpp"
#include "forge/lm/model.hpp"
#include "forge/refinery/config.hpp"
#include "forge/refinery/filters.hpp"
#include "forge/refinery/pipeline.hpp"
#include "forge/scorer/subprocess.hpp"
#include "forge/sensitivity/report.hpp"
#include "forge/synth/tasks.hpp"
#include "forge/synth/vocab.hpp"
#include "forge/train/sweep.hpp"
#include "forge/train/trainer.hpp"
#include "forge/util/error.hpp"
#include "forge/util/hash.hpp"

namespace fs = std::filesystem;
using namespace forge;

namespace {

struct Globals {
  std::optional<std::uint64_t> seed;
  unsigned threads = 1;
  bool deterministic = false;
  std::string config;
};

std::ifstream open_in(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw Error("cannot open " + p.string());
  return in;
}

std::ofstream open_out(const fs::path& p) {
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  std::ofstream out(p, std::ios::binary);
  if (!out) throw Error("cannot write " + p.string());
  return out;
}

std::string slurp(const fs::path& p) {
  auto in = open_in(p);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

train::TrainConfig train_config(const Globals& g) {
  train::TrainConfig c;
  if (!g.config.empty()) c = train::train_config_from_json(slurp(g.config));
  if (g.seed) c.seed = *g.seed;
  c.validate();
  return c;
}

nlohmann::json eval_json(const synth::EvalResult& r) {
  return {{"task", r.task}, {"mean_ce", r.mean_ce}, {"exact_match", r.exact_match},
          {"samples", r.samples}};
}

// ---- refine

struct RefineArgs {
  std::string input, output, langid, quality, dev, report, langid_transcript, quality_transcript;
  bool strict = false;
};

int cmd_refine(const RefineArgs& a, const Globals& g) {
  refinery::RefineryConfig config;
  if (!g.config.empty()) config = refinery::load_refinery_config_file(g.config);
  if (g.seed) config.template_seed = *g.seed;
  if (a.strict) config.strict = true;
  config.validate();

  auto dev_in = open_in(a.dev);
  const auto dev = refinery::read_dev_losses(dev_in);
  auto langid = scorer::open_scorer(a.langid);
  auto quality = scorer::open_scorer(a.quality);

  std::optional<std::ofstream> lt, qt;
  std::optional<scorer::RecordingScorer> lrec, qrec;
  scorer::Scorer* li = langid.get();
  scorer::Scorer* qu = quality.get();
  if (!a.langid_transcript.empty()) {
    lt.emplace(open_out(a.langid_transcript));
    li = &lrec.emplace(*langid, *lt);
  }
  if (!a.quality_transcript.empty()) {
    qt.emplace(open_out(a.quality_transcript));
    qu = &qrec.emplace(*quality, *qt);
  }

  auto in = open_in(a.input);
  std::ostringstream buffered;
  const auto report = refinery::run_pipeline(in, buffered, {*li, *qu}, dev, config);
  open_out(a.output) << buffered.str();
  if (a.report.empty())
    std::cout << report.to_json() << '\n';
  else
    open_out(a.report) << report.to_json() << '\n';
  return 0;
}

// ---- make-synth

struct SynthArgs {
  std::string task = "translation", out, reorder = "identity";
  std::size_t n = 20000;
  int vocab = 64;
};

int cmd_make_synth(const SynthArgs& a, const Globals& g) {
  const std::uint64_t seed = g.seed.value_or(0);
  const bool general = a.task == "general";
  synth::SynthCorpus corpus;
  nlohmann::json meta = {{"task", a.task}, {"n", a.n}, {"seed", seed}, {"vocab_size", a.vocab}};
  if (general) {
    corpus = synth::gen_general_corpus(a.vocab, a.n, hash64(seed, 3));
  } else {
    const auto reorder = a.reorder == "reverse" ? synth::Reorder::Reverse : synth::Reorder::Identity;
    const auto lang = synth::SynthLangSpec::seeded(a.vocab, hash64(seed, 1), reorder);
    corpus = synth::gen_translation_corpus(lang, a.n, hash64(seed, 2));
    meta["reorder"] = a.reorder;
    meta["permutation"] = lang.permutation;
  }
  const fs::path out = a.out;
  fs::create_directories(out);
  auto write = [&](const char* name, const std::vector<synth::SynthExample>& ex) {
    auto f = open_out(out / name);
    const auto records = synth::to_records(ex, general);
    corpus::write_records(f, records);
  };
  write("train.jsonl", corpus.train_examples);
  write("eval.jsonl", corpus.eval_examples);
  meta["train"] = corpus.train_examples.size();
  meta["eval"] = corpus.eval_examples.size();
  open_out(out / "synth.json") << meta.dump(2) << '\n';
  return 0;
}

// ---- train

struct TrainArgs {
  std::string mode = "two-stage", data, model_config, init, out;
  int k = 0, m = 0;
  std::vector<int> skip;
};

lm::Params<float> start_params(const std::string& init, const std::string& model_config,
                               const Globals& g) {
  if (!init.empty()) return lm::load_checkpoint(init);
  if (model_config.empty()) throw UsageError("need --model-config or --init");
  auto config = lm::load_model_config_file(model_config);
  if (g.seed) config.init_seed = *g.seed;
  config.validate();
  return lm::init_params<float>(config);
}

int cmd_train(const TrainArgs& a, const Globals& g) {
  auto params = start_params(a.init, a.model_config, g);
  const auto mode = train::parse_mode(a.mode, params.config.n_layers, a.k, a.m,
                                      std::set<int>(a.skip.begin(), a.skip.end()));
  const auto config = train_config(g);
  const auto data = synth::load_sequences(a.data, synth::SynthVocab(params.config.vocab_size));

  const auto log = train::run(mode, params, data, config, synth::SynthVocab::kPad);
  const fs::path out = a.out;
  fs::create_directories(out);
  open_out(out / "runlog.jsonl") << log.to_jsonl();
  for (std::size_t i = 0; i < log.stages.size(); ++i)
    lm::save_checkpoint(out / ("stage" + std::to_string(i + 1)), log.checkpoints[i]);
  lm::save_checkpoint(out / "final", params);
  open_out(out / "timing.json") << nlohmann::json{{"wall_seconds", log.wall_seconds}}.dump() << '\n';
  return 0;
}

// ---- sweep

struct SweepArgs {
  std::string checkpoint, data, translation_eval, general_eval, out;
};

int cmd_sweep(const SweepArgs& a, const Globals& g) {
  const auto start = lm::load_checkpoint(a.checkpoint);
  const synth::SynthVocab vocab(start.config.vocab_size);
  const auto data = synth::load_sequences(a.data, vocab);
  const auto tr_eval = synth::load_sequences(a.translation_eval, vocab);
  const auto gen_eval = synth::load_sequences(a.general_eval, vocab);
  const unsigned threads = g.deterministic ? 1 : g.threads;
  const auto rows = train::single_layer_sweep(start, data, tr_eval, gen_eval, train_config(g), threads);
  const auto csv = train::sweep_csv(rows);
  if (a.out.empty())
    std::cout << csv;
  else
    open_out(a.out) << csv;
  return 0;
}

// ---- analyze-gradients

struct AnalyzeArgs {
  std::string checkpoint, data, out;
  std::size_t batches = 1, batch_size = 8;
  bool per_batch = false, bars = false;
};

int cmd_analyze(const AnalyzeArgs& a, const Globals& g) {
  const auto params = lm::load_checkpoint(a.checkpoint);
  const auto data = synth::load_sequences(a.data, synth::SynthVocab(params.config.vocab_size));
  train::TrainConfig order;
  order.batch_size = static_cast<int>(a.batch_size);
  order.seed = g.seed.value_or(0);
  auto batches = train::epoch_batches(data, order, 0, synth::SynthVocab::kPad);
  if (batches.size() < a.batches)
    throw Error("probe set has only " + std::to_string(batches.size()) + " batches");
  batches.resize(a.batches);

  sensitivity::ProbeOptions opts;
  opts.per_batch = a.per_batch;
  opts.dataset = fs::path(a.data).filename().string();
  opts.seed = order.seed;
  const auto report = sensitivity::layer_gradient_report(params, batches, opts);
  if (a.out.empty())
    std::cout << sensitivity::render_csv(report);
  else
    open_out(a.out) << sensitivity::render_csv(report);
  if (a.bars) std::cerr << sensitivity::render_bars(report);
  return 0;
}

// ---- eval

struct EvalArgs {
  std::string checkpoint, data, task = "eval", out;
};

int cmd_eval(const EvalArgs& a, const Globals&) {
  const auto params = lm::load_checkpoint(a.checkpoint);
  const auto data = synth::load_sequences(a.data, synth::SynthVocab(params.config.vocab_size));
  const auto text = eval_json(synth::evaluate(params, data, a.task)).dump() + "\n";
  if (a.out.empty())
    std::cout << text;
  else
    open_out(a.out) << text;
  return 0;
}

// ---- compare

int cmd_compare(const std::string& spec_path, const Globals& g) {
  auto spec = experiment::load_experiment_spec(slurp(spec_path), fs::path(spec_path).parent_path());
  if (g.seed) spec.seed = *g.seed;
  const synth::SynthVocab vocab(spec.model.vocab_size);
  lm::Params<float> start;
  if (spec.start_checkpoint) {
    start = lm::load_checkpoint(*spec.start_checkpoint);
  } else {
    const auto general = synth::load_sequences(spec.general_data->string(), vocab);
    start = experiment::pretrain_start_model(spec.model, general, spec.pretrain);
  }
  const auto table = experiment::compare(start, synth::load_sequences(spec.translation_data.string(), vocab),
                                         synth::load_sequences(spec.translation_eval.string(), vocab),
                                         synth::load_sequences(spec.general_eval.string(), vocab), spec.rows);
  fs::create_directories(spec.output_dir);
  if (!spec.start_checkpoint) lm::save_checkpoint(spec.output_dir / "start", start);
  open_out(spec.output_dir / "comparison.csv") << table.to_csv();
  open_out(spec.output_dir / "comparison.json") << table.to_json() << '\n';
  std::cout << table.to_csv();
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"forge: parallel-corpus refinery and layer-selective tuning toolkit"};
  app.require_subcommand(1);
  app.fallthrough();

  Globals g;
  app.add_option_function<std::uint64_t>("--seed", [&](std::uint64_t s) { g.seed = s; },
                                         "Seed for every random choice");
  app.add_option("--threads", g.threads, "Worker cap")->check(CLI::PositiveNumber);
  app.add_flag("--deterministic", g.deterministic, "Run reductions and sweeps sequentially");
  app.add_option("--config", g.config, "JSON config for the subcommand")->check(CLI::ExistingFile);

  RefineArgs ra;
  auto* refine = app.add_subcommand("refine", "Clean, dedup, filter and format a parallel corpus");
  refine->add_option("--input", ra.input)->required()->check(CLI::ExistingFile);
  refine->add_option("--output", ra.output)->required();
  refine->add_option("--langid-scorer", ra.langid, "Command or sidecar file")->required();
  refine->add_option("--quality-scorer", ra.quality, "Command or sidecar file")->required();
  refine->add_option("--dev-set", ra.dev, "JSONL of {src,trg,loss}")->required()->check(CLI::ExistingFile);
  refine->add_flag("--strict", ra.strict);
  refine->add_option("--report", ra.report);
  refine->add_option("--langid-transcript", ra.langid_transcript, "Record langid scores as a sidecar");
  refine->add_option("--quality-transcript", ra.quality_transcript, "Record quality scores as a sidecar");

  SynthArgs sa;
  auto* make_synth = app.add_subcommand("make-synth", "Generate a synthetic task corpus");
  make_synth->add_option("--task", sa.task)->check(CLI::IsMember({"translation", "general"}));
  make_synth->add_option("--n", sa.n)->check(CLI::PositiveNumber);
  make_synth->add_option("--out", sa.out)->required();
  make_synth->add_option("--vocab", sa.vocab)->check(CLI::Range(16, 1 << 20));
  make_synth->add_option("--reorder", sa.reorder)->check(CLI::IsMember({"identity", "reverse"}));

  TrainArgs ta;
  auto* train_cmd = app.add_subcommand("train", "Train with a layer-selection mode");
  train_cmd->add_option("--mode", ta.mode, "two-stage | single-stage | fft | single-layer:<l>");
  train_cmd->add_option("--k", ta.k)->check(CLI::NonNegativeNumber);
  train_cmd->add_option("--m", ta.m)->check(CLI::NonNegativeNumber);
  train_cmd->add_option("--skip", ta.skip)->delimiter(',');
  train_cmd->add_option("--data", ta.data)->required()->check(CLI::ExistingFile);
  train_cmd->add_option("--model-config", ta.model_config)->check(CLI::ExistingFile);
  train_cmd->add_option("--init", ta.init, "Start checkpoint directory")->check(CLI::ExistingDirectory);
  train_cmd->add_option("--out", ta.out)->required();

  SweepArgs wa;
  auto* sweep = app.add_subcommand("sweep", "Train each layer alone and evaluate");
  sweep->add_option("--checkpoint", wa.checkpoint)->required()->check(CLI::ExistingDirectory);
  sweep->add_option("--data", wa.data)->required()->check(CLI::ExistingFile);
  sweep->add_option("--translation-eval", wa.translation_eval)->required()->check(CLI::ExistingFile);
  sweep->add_option("--general-eval", wa.general_eval)->required()->check(CLI::ExistingFile);
  sweep->add_option("--out", wa.out);

  AnalyzeArgs aa;
  auto* analyze = app.add_subcommand("analyze-gradients", "Per-layer nuclear norms of Q/K/V gradients");
  analyze->add_option("--checkpoint", aa.checkpoint)->required()->check(CLI::ExistingDirectory);
  analyze->add_option("--data", aa.data)->required()->check(CLI::ExistingFile);
  analyze->add_option("--batches", aa.batches)->check(CLI::PositiveNumber);
  analyze->add_option("--batch-size", aa.batch_size)->check(CLI::PositiveNumber);
  analyze->add_flag("--per-batch", aa.per_batch, "Average per-batch norms instead of norming the sum");
  analyze->add_flag("--bars", aa.bars, "Print a bar chart to stderr");
  analyze->add_option("--out", aa.out);

  EvalArgs ea;
  auto* eval = app.add_subcommand("eval", "Cross-entropy and exact match on a data set");
  eval->add_option("--checkpoint", ea.checkpoint)->required()->check(CLI::ExistingDirectory);
  eval->add_option("--data", ea.data)->required()->check(CLI::ExistingFile);
  eval->add_option("--task", ea.task);
  eval->add_option("--out", ea.out);

  std::string spec_path;
  auto* compare = app.add_subcommand("compare", "Train several modes from one start and tabulate");
  compare->add_option("--spec", spec_path)->required()->check(CLI::ExistingFile);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    if (code != 0 && e.get_exit_code() != 0) std::cerr << app.help();
    return code == 0 ? 0 : 2;
  }

  try {
    if (*refine) return cmd_refine(ra, g);
    if (*make_synth) return cmd_make_synth(sa, g);
    if (*train_cmd) return cmd_train(ta, g);
    if (*sweep) return cmd_sweep(wa, g);
    if (*analyze) return cmd_analyze(aa, g);
    if (*eval) return cmd_eval(ea, g);
    if (*compare) return cmd_compare(spec_path, g);
  } catch (const UsageError& e) {
    std::cerr << "forge: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "forge: " << e.what() << '\n';
    return 1;
  }
  return 2;
}
