#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "docdec/corpus.hpp"
#include "docdec/metrics.hpp"
#include "docdec/strategies.hpp"

namespace docdec {

struct MetricSelection {
  bool ppl = true;
  bool bleu = true;
  bool gender = true;
  bool formality = true;
  bool contrastive = false;

  /// Names: ppl, bleu, gender, formality, contrastive.
  static MetricSelection parse(std::span<const std::string> names);
  bool needs_references() const { return bleu || gender || formality; }
};

struct RunParams {
  StrategyId strategy = StrategyId::kSentenceLevel;
  DecodeOptions decode;
  double epsilon = 0.05;
  std::uint64_t seed = 0;
};

struct RunReport {
  RunParams params;
  std::vector<std::string> doc_ids;
  std::vector<DecodeResult> results;
  nlohmann::json metrics;  // null when not computed
  std::uint64_t forward_passes = 0;
  double wall_time_s = 0.0;
};

nlohmann::json report_to_json(const RunReport& report);
RunReport report_from_json(const nlohmann::json& j);

/// Sentence tokens of every document, in report order.
DocumentTargets report_targets(const RunReport& report);

nlohmann::json f1_to_json(const F1Report& report);

/// Metrics block shared by decode, evaluate and compare. `contrastive` is
/// only consulted when selected; an empty span derives items from the corpus.
nlohmann::json compute_metrics(const ScorerContract& scorer, const WorldSpec& world,
                               const Corpus& corpus, const DocumentTargets& hypotheses,
                               std::size_t window, const MetricSelection& selection,
                               std::span<const ContrastiveItem> contrastive = {});

/// Decodes the corpus, fills forward-pass totals and wall time, and computes
/// the selected metrics when the corpus allows it.
RunReport run_strategy(const ScorerContract& scorer, const WorldSpec& world, const Corpus& corpus,
                       const RunParams& params, const MetricSelection& selection,
                       std::size_t jobs, std::span<const ContrastiveItem> contrastive = {});

/// Rows of run reports in table order plus the reference perplexity.
nlohmann::json comparison_json(const std::vector<RunReport>& runs, double reference_ppl,
                               double wall_time_s);
std::string comparison_table(const nlohmann::json& comparison);

/// Writes through a temporary file and renames it into place.
void write_atomically(const std::filesystem::path& path, const std::string& contents);

}  // namespace docdec
