#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "docdec/model.hpp"

namespace docdec {

struct BeamParams {
  std::size_t beam_size = 12;
  /// Maximum hypothesis length including eos. Unset means
  /// 2 * |src| + window_sentences + 1, see default_max_len().
  std::optional<std::size_t> max_len;
  bool length_norm = true;

  void validate() const;
};

std::size_t default_max_len(std::span<const Token> src, const Token& separator);

/// Score used for the final ranking: total / |tokens| with length
/// normalization, the raw total otherwise.
double ranking_score(const Hypothesis& h, bool length_norm);

/// Token-level beam search.
///
/// The beam has exactly beam_size slots and every slot costs one scorer call
/// per step; at the first step all slots hold the empty prefix and only the
/// first one is expanded. Pruning keeps the top beam_size candidates by raw
/// cumulative log-prob (ties: lexicographic vocab order); candidates ending in
/// eos move to the completed pool. The search stops when the pool holds
/// beam_size hypotheses, when the best completed raw score is strictly above
/// every live one, or at max_len, where live hypotheses are closed with eos.
///
/// Returns at most beam_size completed hypotheses sorted by ranking_score,
/// ties broken by lexicographic vocab order.
std::vector<Hypothesis> beam_search(const ScorerContract& scorer, std::span<const Token> src,
                                    std::span<const Token> context, const BeamParams& params);

}  // namespace docdec
