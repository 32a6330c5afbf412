#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "docdec/corpus.hpp"
#include "docdec/model.hpp"
#include "docdec/search.hpp"

namespace docdec {

enum class StrategyId {
  kSentenceLevel,
  kNoContext,
  kFullSegment,
  kLastSentence,
  kFirstSentence,
  kTwoPass,
  kDocTrans,
  kDocTransBeam,
  kCheating,
};

/// All strategies in table order.
std::span<const StrategyId> all_strategies();
std::string_view to_string(StrategyId id);
StrategyId parse_strategy(std::string_view name);

enum class DiagnosticKind { kSeparatorDeficit, kSeparatorSurplus };
std::string_view to_string(DiagnosticKind kind);

struct Diagnostic {
  std::size_t sentence_index = 0;
  DiagnosticKind kind = DiagnosticKind::kSeparatorDeficit;

  bool operator==(const Diagnostic&) const = default;
};

struct SplitResult {
  std::vector<Tokens> parts;
  std::optional<DiagnosticKind> diagnostic;
};

/// Splits a segment hypothesis on the separator and drops the trailing eos.
/// Missing parts are padded with empty ones; surplus parts are merged into the
/// last one with their separators kept.
SplitResult split_by_separator(std::span<const Token> tokens, std::size_t expected_parts,
                               const Token& separator, const Token& eos);

struct DecodeOptions {
  std::size_t window = 3;
  BeamParams beam;
  /// Sentence-level beam of doc-trans-beam.
  std::size_t context_beam = 12;
};

struct DecodeResult {
  /// One hypothesis per document sentence, without separators or eos.
  std::vector<Hypothesis> per_sentence;
  std::uint64_t forward_passes = 0;
  std::vector<Diagnostic> diagnostics;
  /// Sum of the raw log-probs (eos and separators included) of the segment
  /// hypotheses the output was taken from. For doc-trans-beam this is the
  /// winning stream's score.
  double score = 0.0;

  bool operator==(const DecodeResult&) const = default;
};

/// Translates one document with the given strategy. Cheating needs references.
DecodeResult decode_document(StrategyId strategy, const ScorerContract& scorer,
                             const Document& document, const DecodeOptions& options);

/// decode_document over every document, fanned out over `jobs` workers
/// (0 = hardware concurrency). Results are in corpus order.
std::vector<DecodeResult> decode_corpus(StrategyId strategy, const ScorerContract& scorer,
                                        const Corpus& corpus, const DecodeOptions& options,
                                        std::size_t jobs = 1);

/// Exact scorer-call count decode_document performs on a document of
/// `sentences` sentences of `length` tokens each, given a position-synchronous
/// model whose argmax path dominates and a vocabulary of at least beam_size+3
/// tokens.
std::uint64_t predicted_cost(StrategyId strategy, std::size_t sentences, std::size_t length,
                             std::size_t window, std::size_t context_beam, std::size_t beam_size);

}  // namespace docdec
