// Acceptance run: one PASS/FAIL line per criterion, tolerances pinned below.
#include <bit>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/SVD>

#include "forge/corpus/codec.hpp"
#include "forge/experiment/compare.hpp"
#include "forge/lm/model.hpp"
#include "forge/refinery/dedup.hpp"
#include "forge/refinery/filters.hpp"
#include "forge/refinery/format.hpp"
#include "forge/refinery/pipeline.hpp"
#include "forge/scorer/sidecar.hpp"
#include "forge/scorer/subprocess.hpp"
#include "forge/sensitivity/nuclear_norm.hpp"
#include "forge/train/schedule.hpp"
#include "forge/train/sweep.hpp"
#include "forge/train/trainer.hpp"
#include "support/fixture.hpp"
#include "support/fn_scorer.hpp"

using namespace forge;

namespace {

// Tolerances.
constexpr double kFiniteDiffTol = 1e-4;
constexpr double kNuclearTol = 1e-8;
constexpr double kNuclearExactTol = 1e-12;
constexpr double kTranslationReduction = 0.5;
constexpr double kGoldenTol = 1e-6;

// Reference run, pinned from the first correct build.
constexpr double kGoldenStartTranslationCe = 12.841055703912962;
constexpr double kGoldenTwoStageTranslationCe = 4.0269740977462343;
constexpr double kGoldenTwoStageDeltaGeneral = 3.3543591905480348;
constexpr double kGoldenFftDeltaGeneral = 3.5037871629411401;

struct Outcome {
  bool pass = true;
  std::string detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail += (detail.empty() ? "" : "; ") + what;
    }
  }
  void note(const std::string& what) { detail += (detail.empty() ? "" : "; ") + what; }
};

std::string fmt(const char* f, double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, x);
  return buf;
}

scorer::SubprocessScorer stub(const std::string& args) {
  return scorer::SubprocessScorer(std::string(STUB_SCORER) + " " + args);
}

// ---- 1

lm::ModelConfig toy_model() {
  lm::ModelConfig c;
  c.n_layers = 6;
  c.d_model = 16;
  c.n_heads = 2;
  c.d_ff = 32;
  c.vocab_size = 32;
  c.max_seq_len = 32;
  c.init_seed = 3;
  return c;
}

train::TrainConfig toy_train() {
  train::TrainConfig t;
  t.lr_max = 3e-3;
  t.lr_min = 5e-4;
  t.batch_size = 8;
  t.grad_accum = 2;
  t.seed = 21;
  return t;
}

Outcome freezing() {
  Outcome o;
  const auto corpus = synth::gen_translation_corpus(synth::SynthLangSpec::seeded(32, 17), 120, 5);
  const auto start = lm::init_params<float>(toy_model());
  const auto sel = train::select_layers(6, 2, 3);
  const std::vector<train::TrainMode> modes{train::TwoStage{sel}, train::SingleStage{sel},
                                            train::FullFineTune{}, train::SingleLayer{4}};
  std::size_t checked = 0, steps = 0, violations = 0;
  for (const auto& mode : modes) {
    auto params = start;
    std::vector<std::uint64_t> before;
    train::run(mode, params, corpus.train, toy_train(), synth::SynthVocab::kPad,
               [&](const train::StepEvent& e) {
                 if (e.phase == train::StepEvent::Phase::Before) {
                   before = lm::tensor_hashes(e.params);
                   return;
                 }
                 ++steps;
                 const auto after = lm::tensor_hashes(e.params);
                 for (std::size_t i = 0; i < after.size(); ++i)
                   if (!e.trainable[i]) {
                     ++checked;
                     violations += after[i] != before[i];
                   }
               });
    if (std::holds_alternative<train::TwoStage>(mode)) {
      // Layer 2 lies between the bottom {0, 1} and the top {3, 4, 5}.
      const auto h0 = lm::tensor_hashes(start), h1 = lm::tensor_hashes(params);
      for (std::size_t i = 0; i < h0.size(); ++i)
        if (lm::layer_of(start.config, i) == 2) o.require(h0[i] == h1[i], "middle layer moved");
    }
  }
  o.require(violations == 0, std::to_string(violations) + " frozen tensors changed");
  o.require(checked > 0, "nothing checked");
  o.note(std::to_string(steps) + " steps, " + std::to_string(checked) + " frozen tensor checks");
  return o;
}

// ---- 2

Outcome gradients() {
  Outcome o;
  lm::ModelConfig c;
  c.n_layers = 2;
  c.d_model = 32;
  c.n_heads = 4;
  c.d_ff = 64;
  c.vocab_size = 20;
  c.max_seq_len = 12;
  c.init_seed = 5;
  auto p = lm::init_params<double>(c);
  std::mt19937_64 rng(99);
  std::normal_distribution<double> n(0, 0.05);
  for (auto& t : p.tensors)
    for (Eigen::Index i = 0; i < t.size(); ++i) t.data()[i] += n(rng);
  lm::Batch b;
  b.ids.resize(3, 10);
  b.mask.resize(3, 10);
  for (Eigen::Index r = 0; r < 3; ++r)
    for (Eigen::Index t = 0; t < 10; ++t) {
      b.ids(r, t) = static_cast<std::int32_t>(rng() % 20);
      b.mask(r, t) = t > 0;
    }
  const auto analytic = lm::loss_and_backward(p, b).grads;
  const double h = 1e-5;
  double worst = 0;
  const int samples = 240;
  for (int k = 0; k < samples; ++k) {
    const std::size_t ti = rng() % p.size();
    const auto idx = static_cast<Eigen::Index>(rng() % static_cast<std::uint64_t>(p[ti].size()));
    auto plus = p, minus = p;
    plus[ti].data()[idx] += h;
    minus[ti].data()[idx] -= h;
    const double fd = (lm::masked_loss(plus, b) - lm::masked_loss(minus, b)) / (2 * h);
    const double an = analytic[ti].data()[idx];
    worst = std::max(worst, std::abs(fd - an) / std::max({std::abs(fd), std::abs(an), 1e-6}));
  }
  o.require(worst < kFiniteDiffTol, "max relative error " + fmt("%.3g", worst));
  o.note(std::to_string(samples) + " parameters, max relative error " + fmt("%.3g", worst));
  return o;
}

// ---- 3

Outcome nuclear() {
  Outcome o;
  std::mt19937_64 rng(31);
  std::normal_distribution<double> n(0, 1);
  double worst = 0;
  for (int t = 0; t < 100; ++t) {
    const auto r = 1 + static_cast<Eigen::Index>(rng() % 16);
    const auto c = 1 + static_cast<Eigen::Index>(rng() % 16);
    Eigen::MatrixXd m(r, c);
    for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = n(rng);
    const double want = Eigen::JacobiSVD<Eigen::MatrixXd>(m).singularValues().sum();
    worst = std::max(worst, std::abs(sensitivity::nuclear_norm(m) - want) / want);
  }
  o.require(worst < kNuclearTol, "max relative error " + fmt("%.3g", worst));
  Eigen::MatrixXd d = Eigen::MatrixXd::Zero(2, 2);
  d(0, 0) = 3;
  d(1, 1) = -4;
  const double id = sensitivity::nuclear_norm(Eigen::MatrixXd::Identity(3, 3));
  const double dg = sensitivity::nuclear_norm(d);
  o.require(std::abs(id - 3) <= kNuclearExactTol, "identity gives " + fmt("%.17g", id));
  o.require(std::abs(dg - 7) <= kNuclearExactTol, "diag(3,-4) gives " + fmt("%.17g", dg));
  o.note("100 matrices, max relative error " + fmt("%.3g", worst));
  return o;
}

// ---- 4

std::vector<bool> brute_force_keep(const std::vector<std::uint64_t>& sigs, int radius, int max_conflicts) {
  std::vector<bool> keep(sigs.size(), false);
  std::vector<std::uint64_t> kept;
  for (std::size_t i = 0; i < sigs.size(); ++i) {
    bool exact = false;
    int conflicts = 0;
    for (auto k : kept) {
      exact |= k == sigs[i];
      conflicts += std::popcount(k ^ sigs[i]) <= radius;
    }
    if (!exact && conflicts <= max_conflicts) {
      keep[i] = true;
      kept.push_back(sigs[i]);
    }
  }
  return keep;
}

Outcome dedup_oracle() {
  Outcome o;
  static const char* words[] = {"the", "cat", "sat", "on", "a", "mat", "dog", "ran", "far", "away",
                                "big", "red", "sun", "rose", "over", "hill", "quiet", "river",
                                "stone", "light", "old", "tree", "wind", "blue"};
  std::mt19937_64 rng(4242);
  auto sentence = [&](int len) {
    std::string s;
    for (int i = 0; i < len; ++i) s += (i ? " " : "") + std::string(words[rng() % 24]);
    return s;
  };
  const refinery::RefineryConfig config;
  std::size_t mismatches = 0, records = 0, dropped = 0;
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 1 + rng() % 500;
    std::vector<corpus::ParallelRecord> rs;
    for (std::size_t i = 0; i < n; ++i) {
      corpus::ParallelRecord r{corpus::LangCode("en"), corpus::LangCode("de"), "", "", i, {}};
      if (!rs.empty() && rng() % 4 == 0) {
        // Exact or near duplicate of an earlier record.
        const auto& base = rs[rng() % rs.size()];
        r.src_line = base.src_line;
        r.tgt_line = base.tgt_line;
        if (rng() % 2) r.tgt_line += " " + std::string(words[rng() % 24]);
      } else {
        r.src_line = sentence(3 + static_cast<int>(rng() % 8));
        r.tgt_line = sentence(3 + static_cast<int>(rng() % 8));
      }
      rs.push_back(std::move(r));
    }
    std::vector<std::uint64_t> sigs;
    for (const auto& r : rs) sigs.push_back(fixture::oracle_simhash(r.src_line, r.tgt_line, false));
    const auto keep = brute_force_keep(sigs, config.hamming_radius, config.max_conflicts);
    std::vector<std::uint64_t> want;
    for (std::size_t i = 0; i < rs.size(); ++i)
      if (keep[i]) want.push_back(rs[i].seq);
    refinery::StageCount count;
    std::vector<std::uint64_t> got;
    for (const auto& r : refinery::dedup(rs, config, count)) got.push_back(r.seq);
    mismatches += got != want;
    records += n;
    dropped += n - want.size();
  }
  o.require(mismatches == 0, std::to_string(mismatches) + " corpora differ from the oracle");
  o.note("200 corpora, " + std::to_string(records) + " records, " + std::to_string(dropped) +
         " dropped by both");
  return o;
}

// ---- 5

Outcome quality() {
  Outcome o;
  const std::vector<double> dev{1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
  const double tau = refinery::quality_threshold(dev, 0.90);
  o.require(tau == 9, "tau is " + fmt("%g", tau));

  std::vector<corpus::ParallelRecord> rs;
  for (int loss = 1; loss <= 10; ++loss)
    rs.push_back({corpus::LangCode("en"), corpus::LangCode("de"), "x y", "w" + std::to_string(loss),
                  static_cast<std::uint64_t>(loss), {}});
  fixture::FnScorer by_target([](const scorer::ScoreRequest& q) {
    return fixture::quality_answer(q.id, std::stod(q.tgt_line.substr(1)));
  });
  const std::map<corpus::LangPair, double> th{{{corpus::LangCode("en"), corpus::LangCode("de")}, tau}};
  refinery::StageCount count;
  const auto kept = refinery::quality_filter(rs, by_target, th, count);
  o.require(count.dropped == 1 && kept.size() == 9 && kept.back().tgt_line == "w9",
            "filter did not drop exactly the loss-10 sample");

  std::mt19937_64 rng(5);
  std::lognormal_distribution<double> ln(0, 1);
  int bad = 0;
  for (int t = 0; t < 1000; ++t) {
    std::vector<double> d(1 + rng() % 400);
    for (auto& x : d) x = rng() % 3 ? ln(rng) : static_cast<double>(rng() % 5);
    const double th2 = refinery::quality_threshold(d, 0.90);
    const auto above = std::count_if(d.begin(), d.end(), [&](double x) { return x > th2; });
    bad += static_cast<double>(above) > (1 - 0.90) * static_cast<double>(d.size()) + 1e-9;
  }
  o.require(bad == 0, std::to_string(bad) + " dev sets exceed the drop fraction");
  o.note("tau " + fmt("%g", tau) + ", 1000 random dev sets");
  return o;
}

// ---- 6

struct PipelineRun {
  std::string output;
  std::string report;
};

PipelineRun refine(const std::string& jsonl, const std::string& dev_text, scorer::Scorer& langid,
                   scorer::Scorer& quality_scorer, refinery::RefineryReport* report = nullptr) {
  std::istringstream in(jsonl), dev(dev_text);
  std::ostringstream out;
  const auto r = refinery::run_pipeline(in, out, {langid, quality_scorer}, refinery::read_dev_losses(dev),
                                        refinery::RefineryConfig{});
  if (report) *report = r;
  return {out.str(), r.to_json()};
}

Outcome determinism() {
  Outcome o;
  const auto fx = fixture::refinery_corpus(1);
  std::vector<PipelineRun> runs;
  for (int i = 0; i < 3; ++i) {
    auto langid = stub("langid --shuffle");
    auto q = stub("quality --shuffle");
    runs.push_back(refine(fx.jsonl, fx.dev_set, langid, q));
  }
  for (int i = 1; i < 3; ++i) {
    o.require(runs[i].output == runs[0].output, "output differs on rerun " + std::to_string(i + 1));
    o.require(runs[i].report == runs[0].report, "report differs on rerun " + std::to_string(i + 1));
  }

  // Re-refine the records that survived, recovered by seq from the input.
  std::istringstream in(fx.jsonl);
  const auto input = corpus::read_records(in).records;
  std::set<std::uint64_t> kept_seqs;
  std::istringstream lines(runs[0].output);
  for (std::string l; std::getline(lines, l);) kept_seqs.insert(refinery::parse_sample_line(l).seq);
  std::vector<corpus::ParallelRecord> survivors;
  for (const auto& r : input)
    if (kept_seqs.contains(r.seq)) survivors.push_back(r);
  std::ostringstream again;
  corpus::write_records(again, survivors);
  auto langid = stub("langid");
  auto q = stub("quality");
  refinery::RefineryReport second;
  refine(again.str(), fx.dev_set, langid, q, &second);
  o.require(second.clean.dropped == 0 && second.prefilter.dropped == 0 && second.dedup.dropped == 0,
            "re-refining dropped records in clean/prefilter/dedup");
  o.note("3 identical runs, " + std::to_string(kept_seqs.size()) + " kept; re-refine dropped " +
         std::to_string(second.clean.dropped + second.prefilter.dropped + second.dedup.dropped) +
         " locally");
  return o;
}

// ---- 7

Outcome schedule() {
  Outcome o;
  const train::TrainConfig c;
  for (long T : {10L, 100L, 1000L}) {
    const long w = train::warmup_steps(T, c.warmup_ratio);
    const double peak = train::lr_at(w - 1, T, c), last = train::lr_at(T - 1, T, c);
    o.require(peak == 1e-5, "T=" + std::to_string(T) + " peak " + fmt("%.17g", peak));
    o.require(last == 2e-6, "T=" + std::to_string(T) + " last " + fmt("%.17g", last));
  }
  o.note("T in {10, 100, 1000}");
  return o;
}

// ---- 8 and 9

struct Reference {
  experiment::ReferenceSetup setup = experiment::reference_setup();
  lm::Params<float> start;
};

Outcome behavior(const Reference& ref) {
  Outcome o;
  const auto& s = ref.setup;
  const auto sel = train::select_layers(s.model.n_layers, s.k, s.m);
  const auto table = experiment::compare(ref.start, s.translation.train, s.translation.eval, s.general.eval,
                                         {{"two-stage", train::TwoStage{sel}, s.tune},
                                          {"fft", train::FullFineTune{}, s.tune}});
  const auto& two = table.rows[0];
  const auto& fft = table.rows[1];
  const double start_ce = table.start_translation.mean_ce;
  const double reduction = 1 - two.translation.mean_ce / start_ce;

  o.require(reduction >= kTranslationReduction, "(a) translation CE reduction " + fmt("%.4f", reduction));
  o.require(two.delta_general_ce <= fft.delta_general_ce,
            "(b) two-stage general CE degradation " + fmt("%.6f", two.delta_general_ce) +
                " exceeds full fine-tuning " + fmt("%.6f", fft.delta_general_ce));
  auto golden = [&](const char* name, double got, double want) {
    o.require(std::abs(got - want) <= kGoldenTol,
              std::string("golden ") + name + " " + fmt("%.17g", got) + " != " + fmt("%.17g", want));
  };
  golden("start translation CE", start_ce, kGoldenStartTranslationCe);
  golden("two-stage translation CE", two.translation.mean_ce, kGoldenTwoStageTranslationCe);
  golden("two-stage general delta", two.delta_general_ce, kGoldenTwoStageDeltaGeneral);
  golden("fft general delta", fft.delta_general_ce, kGoldenFftDeltaGeneral);
  o.note("translation CE " + fmt("%.4f", start_ce) + " -> " + fmt("%.4f", two.translation.mean_ce) +
         " (reduction " + fmt("%.3f", reduction) + "); general CE delta two-stage " +
         fmt("%.4f", two.delta_general_ce) + " vs fft " + fmt("%.4f", fft.delta_general_ce));
  return o;
}

Outcome sweep_shape(const Reference& ref) {
  Outcome o;
  const auto& s = ref.setup;
  const auto before = lm::tensor_hashes(ref.start);
  const auto forward = train::single_layer_sweep(ref.start, s.translation.train, s.translation.eval,
                                                 s.general.eval, s.tune, 4);
  std::vector<int> order(static_cast<std::size_t>(s.model.n_layers));
  for (int l = 0; l < s.model.n_layers; ++l) order[static_cast<std::size_t>(l)] = s.model.n_layers - 1 - l;
  const auto backward = train::single_layer_sweep(ref.start, s.translation.train, s.translation.eval,
                                                  s.general.eval, s.tune, 1, order);
  o.require(forward.size() == static_cast<std::size_t>(s.model.n_layers), "row count " + std::to_string(forward.size()));
  for (std::size_t l = 0; l < forward.size(); ++l)
    o.require(forward[l].layer == static_cast<int>(l), "row " + std::to_string(l) + " out of order");
  o.require(train::sweep_csv(forward) == train::sweep_csv(backward), "result depends on order or threads");
  for (std::size_t l = 0; l < forward.size() && l < backward.size(); ++l)
    o.require(forward[l].final_loss == backward[l].final_loss, "final loss differs at layer " + std::to_string(l));
  o.require(lm::tensor_hashes(ref.start) == before, "start parameters changed");
  o.note(std::to_string(forward.size()) + " rows, identical across orders and thread counts");
  return o;
}

// ---- 10

Outcome transcript() {
  Outcome o;
  const auto fx = fixture::refinery_corpus(3);
  std::stringstream langid_log, quality_log;
  PipelineRun live;
  {
    auto langid = stub("langid --shuffle");
    auto q = stub("quality --shuffle");
    scorer::RecordingScorer lrec(langid, langid_log), qrec(q, quality_log);
    live = refine(fx.jsonl, fx.dev_set, lrec, qrec);
  }
  scorer::SidecarScorer langid_replay(langid_log), quality_replay(quality_log);
  const auto replay = refine(fx.jsonl, fx.dev_set, langid_replay, quality_replay);
  o.require(replay.output == live.output, "pipeline output differs");
  o.require(replay.report == live.report, "report differs");
  o.note(std::to_string(langid_replay.size()) + " langid and " + std::to_string(quality_replay.size()) +
         " quality scores replayed");
  return o;
}

}  // namespace

int main() {
  int failures = 0;
  auto report = [&](int id, const char* name, const std::function<Outcome()>& fn) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = fn();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail = std::string("exception: ") + e.what();
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    failures += !o.pass;
    std::printf("criterion %2d %-34s %s  [%.1fs] %s\n", id, name, o.pass ? "PASS" : "FAIL", secs,
                o.detail.c_str());
    std::fflush(stdout);
  };

  report(1, "freezing soundness", freezing);
  report(2, "gradient correctness", gradients);
  report(3, "nuclear norm oracle", nuclear);
  report(4, "dedup oracle equivalence", dedup_oracle);
  report(5, "quality threshold", quality);
  report(6, "pipeline determinism/idempotence", determinism);
  report(7, "schedule endpoints", schedule);

  Reference ref;
  const auto t0 = std::chrono::steady_clock::now();
  ref.start = experiment::pretrain_start_model(ref.setup.model, ref.setup.general.train, ref.setup.pretrain);
  std::printf("reference start model pretrained in %.1fs\n",
              std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
  report(8, "desk-scale behavioral analog", [&] { return behavior(ref); });
  report(9, "sweep shape", [&] { return sweep_shape(ref); });
  report(10, "scorer transcript equivalence", transcript);

  std::printf("%d of 10 criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
