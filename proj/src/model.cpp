#include "docdec/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace docdec {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

}  // namespace

std::size_t Distribution::argmax() const {
  return static_cast<std::size_t>(std::max_element(log_probs.begin(), log_probs.end()) -
                                  log_probs.begin());
}

std::size_t ScorerContract::index_of(const Token& token) const {
  const Tokens& v = vocab();
  auto it = std::find(v.begin(), v.end(), token);
  if (it == v.end()) throw Error("token '" + token + "' is not in the target vocabulary");
  return static_cast<std::size_t>(it - v.begin());
}

SyntheticModel::SyntheticModel(WorldSpec world) : world_(std::move(world)) {
  world_.validate();
  vocab_ = world_.target_vocab();
  for (std::size_t i = 0; i < vocab_.size(); ++i) vocab_index_.emplace(vocab_[i], i);
  sep_index_ = vocab_index_.at(world_.separator);
  eos_index_ = vocab_index_.at(world_.eos);
  for (const auto& [src, tgt] : world_.lexicon) source_vocab_.insert(src);
  source_vocab_.insert(world_.pronoun_src);
  source_vocab_.insert(world_.formality_src);
  source_vocab_.insert(world_.separator);
  for (const auto& [noun, g] : world_.noun_genders) {
    noun_translation_gender_.emplace(world_.lexicon.at(noun), g);
  }
}

std::size_t SyntheticModel::index_of(const Token& token) const {
  auto it = vocab_index_.find(token);
  if (it == vocab_index_.end()) {
    throw Error("token '" + token + "' is not in the target vocabulary");
  }
  return it->second;
}

std::vector<std::size_t> SyntheticModel::intended(std::span<const Token> src,
                                                  std::span<const Token> context,
                                                  std::span<const Token> prefix) const {
  if (src.empty()) throw Error("empty source window");
  // Source sentence boundaries.
  std::vector<std::span<const Token>> sentences;
  std::size_t begin = 0;
  bool has_marker = false;
  for (std::size_t i = 0; i < src.size(); ++i) {
    if (!source_vocab_.contains(src[i])) {
      throw Error("token '" + src[i] + "' is not in the source vocabulary");
    }
    if (src[i] == world_.separator) {
      sentences.push_back(src.subspan(begin, i - begin));
      begin = i + 1;
    } else if (src[i] == world_.formality_marker) {
      has_marker = true;
    }
  }
  sentences.push_back(src.subspan(begin));

  // Alignment: the current sentence is the number of separators seen on the
  // target side, the position is the distance from the last one.
  std::size_t seps = 0;
  std::size_t pos = 0;
  auto scan = [&](std::span<const Token> part) {
    for (const Token& t : part) {
      if (index_of(t) == sep_index_) {
        ++seps;
        pos = 0;
      } else {
        ++pos;
      }
    }
  };
  scan(context);
  scan(prefix);

  const bool last_sentence = seps + 1 >= sentences.size();
  if (seps >= sentences.size()) return {eos_index_};
  const auto sentence = sentences[seps];
  if (pos >= sentence.size()) return {last_sentence ? eos_index_ : sep_index_};

  const Token& s = sentence[pos];
  if (auto it = world_.lexicon.find(s); it != world_.lexicon.end()) {
    return {vocab_index_.at(it->second)};
  }
  if (s == world_.pronoun_src) {
    auto resolve = [&](std::span<const Token> part) -> const Gender* {
      for (auto it = part.rbegin(); it != part.rend(); ++it) {
        if (auto g = noun_translation_gender_.find(*it); g != noun_translation_gender_.end()) {
          return &g->second;
        }
      }
      return nullptr;
    };
    const Gender* g = resolve(prefix);
    if (g == nullptr) g = resolve(context);
    if (g != nullptr) return {vocab_index_.at(world_.pronoun_token(*g))};
    return {vocab_index_.at(world_.pronoun_tgt[0]), vocab_index_.at(world_.pronoun_tgt[1]),
            vocab_index_.at(world_.pronoun_tgt[2])};
  }
  if (s == world_.formality_src) {
    if (has_marker) return {vocab_index_.at(world_.formality_token(Formality::kFormal))};
    return {vocab_index_.at(world_.formality_tgt[0]), vocab_index_.at(world_.formality_tgt[1])};
  }
  throw Error("source token '" + s + "' has no translation rule");
}

Distribution SyntheticModel::next_token_distribution(std::span<const Token> src,
                                                     std::span<const Token> context,
                                                     std::span<const Token> prefix) const {
  const std::vector<std::size_t> hits = intended(src, context, prefix);
  const double eps = world_.epsilon;
  const double k = static_cast<double>(hits.size());
  const double rest = static_cast<double>(vocab_.size() - hits.size());
  const double noise = eps > 0.0 ? std::log(eps / rest) : kNegInf;
  Distribution d;
  d.log_probs.assign(vocab_.size(), noise);
  const double hit = std::log((1.0 - eps) / k);
  for (std::size_t i : hits) d.log_probs[i] = hit;
  return d;
}

Hypothesis score_sequence(const ScorerContract& scorer, std::span<const Token> src,
                          std::span<const Token> context, std::span<const Token> target) {
  if (target.empty() || target.back() != scorer.eos()) {
    throw Error("scored target must end with eos");
  }
  Hypothesis h;
  h.tokens.assign(target.begin(), target.end());
  h.token_logprobs.reserve(target.size());
  for (std::size_t i = 0; i < target.size(); ++i) {
    const Distribution d = scorer.next_token_distribution(src, context, target.first(i));
    const double lp = d.log_probs.at(scorer.index_of(target[i]));
    h.token_logprobs.push_back(lp);
    h.total_logprob += lp;
  }
  return h;
}

namespace {

struct ExactSearch {
  const ScorerContract& scorer;
  std::span<const Token> src;
  std::span<const Token> context;
  std::size_t max_len;
  std::size_t eos;

  Tokens prefix;
  std::vector<double> logprobs;
  double score = 0.0;

  bool found = false;
  Hypothesis best;

  void visit() {
    const Distribution d = scorer.next_token_distribution(src, context, prefix);
    const bool forced = prefix.size() + 1 == max_len;
    const Tokens& vocab = scorer.vocab();
    for (std::size_t t = 0; t < vocab.size(); ++t) {
      if (forced && t != eos) continue;
      const double total = score + d.log_probs[t];
      if (t == eos) {
        if (!found || total > best.total_logprob) {
          found = true;
          best.tokens = prefix;
          best.tokens.push_back(vocab[t]);
          best.token_logprobs = logprobs;
          best.token_logprobs.push_back(d.log_probs[t]);
          best.total_logprob = total;
        }
        continue;
      }
      // Log-probs are non-positive: a prefix that cannot beat the incumbent
      // never will.
      if (found && !(total > best.total_logprob)) continue;
      prefix.push_back(vocab[t]);
      logprobs.push_back(d.log_probs[t]);
      const double saved = score;
      score = total;
      visit();
      score = saved;
      prefix.pop_back();
      logprobs.pop_back();
    }
  }
};

}  // namespace

Hypothesis exact_decode(const ScorerContract& scorer, std::span<const Token> src,
                        std::span<const Token> context, std::size_t max_len) {
  if (max_len == 0) throw Error("max_len must be at least 1");
  constexpr double kGuard = 1e7;
  const double v = static_cast<double>(scorer.vocab().size());
  if (std::pow(v, static_cast<double>(max_len)) > kGuard) {
    throw Error("exact search space |V|^max_len exceeds 1e7; use beam_search instead");
  }
  ExactSearch search{scorer, src, context, max_len, scorer.index_of(scorer.eos()), {}, {}, 0.0, false, {}};
  search.visit();
  return search.best;
}

}  // namespace docdec
