#include "forge/refinery/filters.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <set>

#include <json.hpp>

namespace forge::refinery {

const char* to_string(DropReason reason) noexcept {
  switch (reason) {
    case DropReason::None: return "None";
    case DropReason::TooShort: return "TooShort";
    case DropReason::LengthMismatch: return "LengthMismatch";
    case DropReason::Duplicate: return "Duplicate";
    case DropReason::LangMismatch: return "LangMismatch";
    case DropReason::LowConfidence: return "LowConfidence";
    case DropReason::LowQuality: return "LowQuality";
  }
  return "?";
}

std::string pair_key(const corpus::LangPair& pair) {
  return pair.first.str() + "-" + pair.second.str();
}

DropReason prefilter_counts(std::size_t ls, std::size_t lt, const RefineryConfig& config) noexcept {
  const auto min_tokens = static_cast<std::size_t>(config.min_tokens);
  if (ls < min_tokens || lt < min_tokens) return DropReason::TooShort;
  const auto lo = static_cast<double>(std::min(ls, lt));
  const auto hi = static_cast<double>(std::max(ls, lt));
  if (hi > 0 && lo / hi < config.min_len_ratio) return DropReason::LengthMismatch;
  return DropReason::None;
}

DropReason prefilter(const corpus::ParallelRecord& r, const RefineryConfig& config,
                     const corpus::TokenizationTable& table) {
  const auto ls = corpus::tokenize(r.src_line, table.mode(r.src)).size();
  const auto lt = corpus::tokenize(r.tgt_line, table.mode(r.trg)).size();
  return prefilter_counts(ls, lt, config);
}

DropReason langid_decision(const corpus::ParallelRecord& r, const scorer::ScoreResponse& src,
                           const scorer::ScoreResponse& tgt, double min_prob) {
  if (src.lang != r.src.str() || tgt.lang != r.trg.str()) return DropReason::LangMismatch;
  if (src.prob < min_prob || tgt.prob < min_prob) return DropReason::LowConfidence;
  return DropReason::None;
}

std::vector<corpus::ParallelRecord> langid_filter(std::span<const corpus::ParallelRecord> records,
                                                  scorer::Scorer& scorer,
                                                  const RefineryConfig& config, StageCount& count,
                                                  std::map<std::string, std::size_t>* reasons) {
  std::vector<scorer::ScoreRequest> requests;
  requests.reserve(2 * records.size());
  for (const auto& r : records) {
    requests.push_back(scorer::ScoreRequest::langid(langid_src_id(r.seq), r.src_line));
    requests.push_back(scorer::ScoreRequest::langid(langid_tgt_id(r.seq), r.tgt_line));
  }
  const auto responses = scorer.score(requests);
  std::vector<corpus::ParallelRecord> out;
  for (std::size_t i = 0; i < records.size(); ++i) {
    const auto why =
        langid_decision(records[i], responses[2 * i], responses[2 * i + 1], config.langid_min_prob);
    if (why == DropReason::None) {
      out.push_back(records[i]);
      ++count.kept;
    } else {
      ++count.dropped;
      if (reasons) ++(*reasons)[to_string(why)];
    }
  }
  return out;
}

double quality_threshold(std::span<const double> dev_losses, double percentile) {
  if (dev_losses.empty()) throw EmptyDevSet();
  std::vector<double> sorted(dev_losses.begin(), dev_losses.end());
  std::sort(sorted.begin(), sorted.end());
  const auto n = static_cast<double>(sorted.size());
  // The slack absorbs representation error in p*N (0.7 * 10 == 7.000000000000001).
  auto rank = static_cast<std::size_t>(std::ceil(percentile * n - 1e-9));
  rank = std::clamp<std::size_t>(rank, 1, sorted.size());
  return sorted[rank - 1];
}

DevLosses read_dev_losses(std::istream& in) {
  DevLosses dev;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      auto j = nlohmann::json::parse(line);
      corpus::LangPair pair{corpus::LangCode(j.at("src").get<std::string>()),
                            corpus::LangCode(j.at("trg").get<std::string>())};
      const double loss = j.at("loss").get<double>();
      if (!std::isfinite(loss)) throw Error("non-finite loss");
      dev[pair].push_back(loss);
    } catch (const std::exception& e) {
      throw Error("dev set line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return dev;
}

std::map<corpus::LangPair, double> quality_thresholds(const DevLosses& dev,
                                                      std::span<const corpus::LangPair> pairs,
                                                      double percentile) {
  std::vector<double> pooled;
  for (const auto& [pair, losses] : dev) pooled.insert(pooled.end(), losses.begin(), losses.end());
  std::map<corpus::LangPair, double> out;
  for (const auto& pair : pairs) {
    if (out.contains(pair)) continue;
    auto it = dev.find(pair);
    out[pair] = it != dev.end() && !it->second.empty()
                    ? quality_threshold(it->second, percentile)
                    : quality_threshold(pooled, percentile);
  }
  return out;
}

std::vector<corpus::ParallelRecord> quality_filter(
    std::span<const corpus::ParallelRecord> records, scorer::Scorer& scorer,
    const std::map<corpus::LangPair, double>& thresholds, StageCount& count) {
  std::vector<scorer::ScoreRequest> requests;
  requests.reserve(records.size());
  for (const auto& r : records)
    requests.push_back(
        scorer::ScoreRequest::quality(r.seq, r.src.str(), r.trg.str(), r.src_line, r.tgt_line));
  const auto responses = scorer.score(requests);
  std::vector<corpus::ParallelRecord> out;
  for (std::size_t i = 0; i < records.size(); ++i) {
    const double tau = thresholds.at(corpus::pair_of(records[i]));
    if (responses[i].loss <= tau) {
      out.push_back(records[i]);
      ++count.kept;
    } else {
      ++count.dropped;
    }
  }
  return out;
}

}  // namespace forge::refinery
