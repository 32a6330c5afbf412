#pragma once

#include <cstddef>
#include <cstdint>

#include "docdec/corpus.hpp"
#include "docdec/world.hpp"

namespace docdec {

struct SyntheticCorpusOptions {
  std::size_t n_docs = 100;
  std::size_t sents_per_doc = 6;
  std::size_t sent_len = 8;
  /// Sentences per model window; pronoun antecedents lie 1..window-1
  /// sentences back and formal markers stay inside the window.
  std::size_t window = 3;
  double pronoun_rate = 0.3;
  double you_rate = 0.2;
  double noun_rate = 0.25;
  double formal_share = 0.5;
};

/// Generates documents with sources, sampled references and ground-truth
/// annotations for every pronoun and second-person token.
///
/// References are drawn left to right from the synthetic model conditioned on
/// the previously drawn references of the window: the argmax token (vocab
/// tie-break) with probability 1-eps, otherwise a uniformly drawn
/// non-structural token. Deterministic in (world, seed, options).
Corpus generate_synthetic_corpus(const WorldSpec& world, std::uint64_t seed,
                                 const SyntheticCorpusOptions& options);

}  // namespace docdec
