#pragma once

#include <atomic>
#include <cstddef>
#include <cstdint>
#include <span>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "docdec/types.hpp"
#include "docdec/world.hpp"

namespace docdec {

/// Log-probabilities aligned with the scorer's vocab() order.
struct Distribution {
  std::vector<double> log_probs;

  /// Index of the most probable token; ties go to the lowest vocab index.
  std::size_t argmax() const;
};

struct Hypothesis {
  Tokens tokens;
  double total_logprob = 0.0;
  std::vector<double> token_logprobs;

  bool operator==(const Hypothesis&) const = default;
};

/// An autoregressive next-token model over a fixed target vocabulary.
///
/// `src` is the whole source window with separators between sentences.
/// `context` holds already fixed target sentences, each terminated by the
/// separator; `prefix` is what has been generated for the current segment.
/// Implementations must be deterministic and safe to call concurrently.
class ScorerContract {
 public:
  virtual ~ScorerContract() = default;

  virtual Distribution next_token_distribution(std::span<const Token> src,
                                               std::span<const Token> context,
                                               std::span<const Token> prefix) const = 0;
  virtual const Tokens& vocab() const = 0;
  virtual const Token& separator() const = 0;
  virtual const Token& eos() const = 0;

  /// Vocab index of `token`; throws Error for unknown tokens. The default
  /// scans vocab().
  virtual std::size_t index_of(const Token& token) const;
};

/// Forwards to another scorer and counts calls. One instance per decode run.
class CountingScorer final : public ScorerContract {
 public:
  explicit CountingScorer(const ScorerContract& inner) : inner_(inner) {}

  Distribution next_token_distribution(std::span<const Token> src,
                                       std::span<const Token> context,
                                       std::span<const Token> prefix) const override {
    calls_.fetch_add(1, std::memory_order_relaxed);
    return inner_.next_token_distribution(src, context, prefix);
  }
  const Tokens& vocab() const override { return inner_.vocab(); }
  const Token& separator() const override { return inner_.separator(); }
  const Token& eos() const override { return inner_.eos(); }
  std::size_t index_of(const Token& token) const override { return inner_.index_of(token); }

  std::uint64_t calls() const { return calls_.load(std::memory_order_relaxed); }

 private:
  const ScorerContract& inner_;
  mutable std::atomic<std::uint64_t> calls_{0};
};

/// Deterministic closed-form translation model over a WorldSpec.
///
/// The output is position-synchronous with the source: the n-th token after
/// the j-th separator translates the n-th token of source sentence j (context
/// sentences count). For each position the intended token gets mass 1-eps and
/// the rest of the vocabulary shares eps uniformly:
///   lexicon word      -> its translation
///   pronoun           -> pronoun of the gender of the most recent noun
///                        translation in context+prefix; no noun -> the three
///                        pronouns share 1-eps
///   second person     -> formal form if the marker occurs anywhere in the
///                        source window; otherwise both forms share 1-eps
///   end of sentence   -> separator, or eos for the last window sentence
class SyntheticModel final : public ScorerContract {
 public:
  explicit SyntheticModel(WorldSpec world);

  Distribution next_token_distribution(std::span<const Token> src,
                                       std::span<const Token> context,
                                       std::span<const Token> prefix) const override;
  const Tokens& vocab() const override { return vocab_; }
  const Token& separator() const override { return world_.separator; }
  const Token& eos() const override { return world_.eos; }
  std::size_t index_of(const Token& token) const override;

  const WorldSpec& world() const { return world_; }

  /// Indices that receive the 1-eps mass; more than one means a tie.
  std::vector<std::size_t> intended(std::span<const Token> src, std::span<const Token> context,
                                    std::span<const Token> prefix) const;

 private:
  WorldSpec world_;
  Tokens vocab_;
  std::unordered_map<Token, std::size_t> vocab_index_;
  std::unordered_set<Token> source_vocab_;
  std::unordered_map<Token, Gender> noun_translation_gender_;
  std::size_t sep_index_ = 0;
  std::size_t eos_index_ = 0;
};

/// Scores `target` token by token (teacher forcing). `target` must end in eos.
/// A zero-probability token makes the total -inf.
Hypothesis score_sequence(const ScorerContract& scorer, std::span<const Token> src,
                          std::span<const Token> context, std::span<const Token> target);

/// Exhaustive search over every eos-terminated sequence of at most `max_len`
/// tokens (eos included). Ties go to the lexicographically first sequence in
/// vocab order. Refuses instances with |V|^max_len > 1e7.
Hypothesis exact_decode(const ScorerContract& scorer, std::span<const Token> src,
                        std::span<const Token> context, std::size_t max_len);

}  // namespace docdec
