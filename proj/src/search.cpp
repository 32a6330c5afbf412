#include "docdec/search.hpp"

#include <algorithm>
#include <cmath>

namespace docdec {

void BeamParams::validate() const {
  if (beam_size == 0) throw Error("beam size must be at least 1");
  if (max_len && *max_len == 0) throw Error("max_len must be at least 1");
}

std::size_t default_max_len(std::span<const Token> src, const Token& separator) {
  const auto seps = static_cast<std::size_t>(std::count(src.begin(), src.end(), separator));
  return 2 * src.size() + (seps + 1) + 1;
}

double ranking_score(const Hypothesis& h, bool length_norm) {
  if (!length_norm || h.tokens.empty()) return h.total_logprob;
  return h.total_logprob / static_cast<double>(h.tokens.size());
}

namespace {

struct Partial {
  std::vector<std::size_t> ids;
  Tokens tokens;
  std::vector<double> logprobs;
  double score = 0.0;
};

struct Candidate {
  double score;
  std::size_t parent;  // index into the lexicographically sorted live list
  std::size_t token;
};

bool candidate_before(const Candidate& a, const Candidate& b) {
  if (a.score != b.score) return a.score > b.score;
  if (a.parent != b.parent) return a.parent < b.parent;
  return a.token < b.token;
}

}  // namespace

std::vector<Hypothesis> beam_search(const ScorerContract& scorer, std::span<const Token> src,
                                    std::span<const Token> context, const BeamParams& params) {
  params.validate();
  const std::size_t beam = params.beam_size;
  const std::size_t max_len = params.max_len.value_or(default_max_len(src, scorer.separator()));
  const Tokens& vocab = scorer.vocab();
  const std::size_t eos = scorer.index_of(scorer.eos());

  std::vector<Partial> live(1);
  std::vector<Partial> completed;
  std::vector<Candidate> candidates;

  for (std::size_t step = 1; step <= max_len && !live.empty(); ++step) {
    const bool forced = step == max_len;
    std::vector<Distribution> dists;
    dists.reserve(live.size());
    for (const Partial& p : live) {
      dists.push_back(scorer.next_token_distribution(src, context, p.tokens));
    }
    // Idle slots are still evaluated, as a batched decoder would.
    for (std::size_t slot = live.size(); slot < beam; ++slot) {
      scorer.next_token_distribution(src, context, live.front().tokens);
    }

    candidates.clear();
    for (std::size_t p = 0; p < live.size(); ++p) {
      const std::vector<double>& lp = dists[p].log_probs;
      if (forced) {
        candidates.push_back({live[p].score + lp[eos], p, eos});
        continue;
      }
      for (std::size_t t = 0; t < vocab.size(); ++t) {
        candidates.push_back({live[p].score + lp[t], p, t});
      }
    }
    const std::size_t keep = std::min(beam, candidates.size());
    std::partial_sort(candidates.begin(), candidates.begin() + static_cast<std::ptrdiff_t>(keep),
                      candidates.end(), candidate_before);

    std::vector<Partial> next;
    for (std::size_t c = 0; c < keep; ++c) {
      const Candidate& cand = candidates[c];
      Partial ext = live[cand.parent];
      ext.ids.push_back(cand.token);
      ext.tokens.push_back(vocab[cand.token]);
      ext.logprobs.push_back(dists[cand.parent].log_probs[cand.token]);
      ext.score = cand.score;
      if (cand.token == eos) {
        completed.push_back(std::move(ext));
      } else {
        next.push_back(std::move(ext));
      }
    }
    std::sort(next.begin(), next.end(),
              [](const Partial& a, const Partial& b) { return a.ids < b.ids; });
    live = std::move(next);

    if (completed.size() >= beam) break;
    if (!completed.empty()) {
      double best_done = completed.front().score;
      for (const Partial& p : completed) best_done = std::max(best_done, p.score);
      const bool beaten = std::all_of(live.begin(), live.end(),
                                      [&](const Partial& p) { return best_done > p.score; });
      if (beaten) break;
    }
  }

  std::vector<Hypothesis> out;
  std::vector<std::vector<std::size_t>> ids;
  out.reserve(completed.size());
  for (Partial& p : completed) {
    out.push_back({std::move(p.tokens), p.score, std::move(p.logprobs)});
    ids.push_back(std::move(p.ids));
  }
  std::vector<std::size_t> order(out.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::vector<double> rank(out.size());
  for (std::size_t i = 0; i < out.size(); ++i) rank[i] = ranking_score(out[i], params.length_norm);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (rank[a] != rank[b]) return rank[a] > rank[b];
    return ids[a] < ids[b];
  });
  std::vector<Hypothesis> ranked;
  for (std::size_t i = 0; i < order.size() && i < beam; ++i) ranked.push_back(std::move(out[order[i]]));
  return ranked;
}

}  // namespace docdec
