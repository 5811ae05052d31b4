#include "forge/refinery/pipeline.hpp"

#include <ostream>
#include <sstream>

#include <json.hpp>

#include "forge/corpus/codec.hpp"
#include "forge/refinery/clean.hpp"
#include "forge/refinery/dedup.hpp"

namespace forge::refinery {

bool RefineryReport::accounting_holds() const noexcept {
  const StageCount* stages[] = {&clean, &prefilter, &dedup, &langid, &quality, &format};
  std::size_t prev = input;
  for (const auto* s : stages) {
    if (s->kept + s->dropped != prev) return false;
    prev = s->kept;
  }
  return true;
}

std::string RefineryReport::to_json() const {
  nlohmann::ordered_json j;
  j["input"] = input;
  j["malformed"] = malformed;
  auto stage = [](const StageCount& s) {
    return nlohmann::ordered_json{{"kept", s.kept}, {"dropped", s.dropped}};
  };
  j["stages"] = nlohmann::ordered_json{{"clean", stage(clean)},   {"prefilter", stage(prefilter)},
                                       {"dedup", stage(dedup)},   {"langid", stage(langid)},
                                       {"quality", stage(quality)}, {"format", stage(format)}};
  j["drop_reasons"] = drop_reasons;
  j["quality_threshold"] = quality_threshold;
  return j.dump();
}

std::vector<corpus::ParallelRecord> run_local_stages(std::vector<corpus::ParallelRecord> records,
                                                     const RefineryConfig& config,
                                                     RefineryReport& report) {
  for (auto& r : records) r = clean_record(std::move(r));
  report.clean.kept += records.size();

  const corpus::TokenizationTable table(config.per_character_langs);
  std::vector<corpus::ParallelRecord> kept;
  for (auto& r : records) {
    const auto why = prefilter(r, config, table);
    if (why == DropReason::None) {
      kept.push_back(std::move(r));
      ++report.prefilter.kept;
    } else {
      ++report.prefilter.dropped;
      ++report.drop_reasons[to_string(why)];
    }
  }

  StageCount before = report.dedup;
  auto deduped = dedup(kept, config, report.dedup);
  if (report.dedup.dropped > before.dropped)
    report.drop_reasons["Duplicate"] += report.dedup.dropped - before.dropped;
  return deduped;
}

RefineryReport run_pipeline(std::istream& input, std::ostream& output, Scorers scorers,
                            const DevLosses& dev, const RefineryConfig& config,
                            PipelineTrace* trace) {
  config.validate();
  RefineryReport report;
  auto read = corpus::read_records(input, config.strict);
  report.input = read.records.size();
  report.malformed = read.malformed_lines.size();

  auto deduped = run_local_stages(std::move(read.records), config, report);
  if (trace) trace->deduped = deduped;

  auto langid_kept =
      langid_filter(deduped, scorers.langid, config, report.langid, &report.drop_reasons);
  if (trace) trace->langid = langid_kept;

  std::vector<corpus::LangPair> pairs;
  for (const auto& r : langid_kept) pairs.push_back(corpus::pair_of(r));
  std::vector<corpus::ParallelRecord> quality_kept;
  if (!langid_kept.empty()) {
    const auto thresholds = quality_thresholds(dev, pairs, config.quality_percentile);
    for (const auto& [pair, tau] : thresholds) report.quality_threshold[pair_key(pair)] = tau;
    quality_kept = quality_filter(langid_kept, scorers.quality, thresholds, report.quality);
    if (report.quality.dropped) report.drop_reasons["LowQuality"] += report.quality.dropped;
  }
  if (trace) trace->quality = quality_kept;

  const auto& pool = config.templates.empty() ? default_templates() : config.templates;
  if (pool.empty()) throw EmptyTemplatePool();
  std::ostringstream buffer;
  for (const auto& r : quality_kept) {
    buffer << format_sample_line(format_instruction(r, pool, config.template_seed));
    ++report.format.kept;
  }
  output << buffer.str();
  return report;
}

}  // namespace forge::refinery
