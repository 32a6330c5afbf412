#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "docdec/corpus.hpp"
#include "docdec/model.hpp"
#include "docdec/world.hpp"

namespace docdec {

/// Per document, per sentence target tokens (no separators, no eos).
using DocumentTargets = std::vector<std::vector<Tokens>>;

enum class Conditioning { kOwnContext, kReferenceContext, kNoContext };
std::string_view to_string(Conditioning c);
Conditioning parse_conditioning(std::string_view s);

/// exp(-sum log p / token count) with eos counted as a token. Each sentence is
/// scored with the source window [i-W+1, i] and the conditioning's context.
double perplexity(const ScorerContract& scorer, const Corpus& documents,
                  const DocumentTargets& targets, Conditioning conditioning, std::size_t window);

/// Corpus BLEU-4, flat weights, no smoothing. In [0, 1].
double bleu(const std::vector<Tokens>& hypotheses, const std::vector<Tokens>& references);

enum class PronounCategory { kGender, kFormality };

struct PronounEvalSpec {
  PronounCategory category = PronounCategory::kGender;
  std::set<Token> src_triggers;
  std::map<Token, std::string> class_map;
  std::size_t min_support = 100;

  static PronounEvalSpec gender(const WorldSpec& world);
  static PronounEvalSpec formality(const WorldSpec& world);
};

struct ClassScores {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  std::size_t support = 0;
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t fn = 0;
};

struct F1Report {
  std::map<std::string, ClassScores> per_class;
  /// Mean F1 over classes with support >= min_support; 0 when none qualify.
  double macro_f1 = 0.0;
  std::vector<std::string> macro_classes;
  /// F1 over pooled TP/FP/FN.
  double micro_f1 = 0.0;
  std::size_t instances = 0;
};

/// Pronoun translation F1. A sentence yields instances only if its source has
/// a trigger and its reference a class token; the k-th reference class token
/// is matched with the k-th hypothesis class token, and the instance count is
/// min(#triggers, #reference class tokens).
F1Report pronoun_f1(const Corpus& documents, const DocumentTargets& hypotheses,
                    const PronounEvalSpec& spec);

struct ContrastiveItem {
  Tokens src;
  Tokens ctx;
  Tokens correct;
  std::vector<Tokens> wrong;
  Tokens ctx_right;
};

/// Fraction of items whose correct target strictly outscores every wrong
/// one. Targets without a trailing eos get one appended.
double contrastive_accuracy(const ScorerContract& scorer, std::span<const ContrastiveItem> items);

/// Items for every gender-annotated pronoun whose reference token is a
/// pronoun: correct = reference, wrong = reference with the other pronouns.
std::vector<ContrastiveItem> make_contrastive_items(const WorldSpec& world, const Corpus& corpus,
                                                    std::size_t window);

std::vector<ContrastiveItem> load_contrastive(const std::filesystem::path& path);
std::vector<ContrastiveItem> parse_contrastive(std::string_view jsonl);
std::string contrastive_to_jsonl(std::span<const ContrastiveItem> items);

}  // namespace docdec
