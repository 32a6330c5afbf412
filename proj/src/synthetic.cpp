#include "docdec/synthetic.hpp"

#include <algorithm>
#include <cstdio>
#include <optional>
#include <random>

#include "docdec/model.hpp"

namespace docdec {

namespace {

/// Bounded draws on top of mt19937_64 that do not depend on the standard
/// library's distribution implementations, so corpora match across platforms.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::size_t below(std::size_t n) {
    const std::uint64_t bound = n;
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                                std::numeric_limits<std::uint64_t>::max() % bound;
    std::uint64_t x;
    do {
      x = engine_();
    } while (x >= limit);
    return static_cast<std::size_t>(x % bound);
  }

  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  bool chance(double p) { return uniform() < p; }

 private:
  std::mt19937_64 engine_;
};

struct Vocabulary {
  std::vector<Token> nouns;
  std::vector<Token> fillers;  // lexicon words that are neither nouns nor the marker
};

Token take(Rng& rng, std::vector<Token>& pool) {
  const std::size_t k = rng.below(pool.size());
  Token t = std::move(pool[k]);
  pool.erase(pool.begin() + static_cast<std::ptrdiff_t>(k));
  return t;
}

std::size_t take_position(Rng& rng, std::vector<std::size_t>& free) {
  const std::size_t k = rng.below(free.size());
  const std::size_t pos = free[k];
  free.erase(free.begin() + static_cast<std::ptrdiff_t>(k));
  return pos;
}

std::vector<Sentence> generate_sources(const WorldSpec& world, const Vocabulary& vocab,
                                       const SyntheticCorpusOptions& opt, Rng& rng) {
  const std::size_t m = opt.sents_per_doc;
  const std::size_t len = opt.sent_len;
  const std::size_t reach = opt.window > 0 ? opt.window - 1 : 0;
  const Formality regime = rng.chance(opt.formal_share) ? Formality::kFormal : Formality::kInformal;

  std::vector<Sentence> sentences(m);
  std::optional<std::size_t> last_noun_sentence;
  Gender last_noun_gender = Gender::kMale;
  std::optional<std::size_t> last_marker_sentence;
  bool has_pronoun = false;

  for (std::size_t i = 0; i < m; ++i) {
    Sentence& s = sentences[i];
    s.src.assign(len, Token{});
    s.annotations.emplace();
    std::vector<std::size_t> free(len);
    for (std::size_t p = 0; p < len; ++p) free[p] = p;

    // The last sentence needs an antecedent if no pronoun was placed yet.
    const bool force_noun_end = !has_pronoun && m >= 2 && i + 2 == m;
    if (force_noun_end) free.pop_back();

    const bool eligible = last_noun_sentence && i - *last_noun_sentence >= 1 &&
                          i - *last_noun_sentence <= reach;
    std::optional<std::size_t> it_pos;
    if (eligible && !free.empty() &&
        (rng.chance(opt.pronoun_rate) || (!has_pronoun && i + 1 == m))) {
      it_pos = take_position(rng, free);
      s.src[*it_pos] = world.pronoun_src;
      s.annotations->push_back({*it_pos, gender_annotation(last_noun_gender)});
      has_pronoun = true;
    }

    if (!free.empty() && rng.chance(opt.you_rate)) {
      const bool marker_visible = last_marker_sentence && i - *last_marker_sentence <= reach;
      const bool needs_marker = regime == Formality::kFormal && !marker_visible;
      if (!needs_marker || free.size() >= 2) {
        const std::size_t you = take_position(rng, free);
        s.src[you] = world.formality_src;
        s.annotations->push_back({you, formality_annotation(regime)});
        if (needs_marker) {
          s.src[take_position(rng, free)] = world.formality_marker;
          last_marker_sentence = i;
        }
      }
    }

    std::vector<Token> nouns = vocab.nouns;
    std::vector<Token> fillers = vocab.fillers;
    std::sort(free.begin(), free.end());
    for (std::size_t p : free) {
      const bool noun_allowed = !it_pos || p > *it_pos;
      const bool noun = noun_allowed && !nouns.empty() && rng.chance(opt.noun_rate);
      s.src[p] = take(rng, noun ? nouns : fillers);
    }
    if (force_noun_end) s.src[len - 1] = take(rng, nouns);

    for (std::size_t p = len; p-- > 0;) {
      if (auto g = world.noun_genders.find(s.src[p]); g != world.noun_genders.end()) {
        last_noun_sentence = i;
        last_noun_gender = g->second;
        break;
      }
    }
    std::sort(s.annotations->begin(), s.annotations->end(),
              [](const Annotation& a, const Annotation& b) { return a.pos < b.pos; });
  }
  return sentences;
}

void sample_references(const SyntheticModel& model, const SyntheticCorpusOptions& opt,
                       Document& doc, Rng& rng) {
  const WorldSpec& world = model.world();
  const Tokens& vocab = model.vocab();
  std::vector<std::size_t> content;
  for (std::size_t t = 0; t < vocab.size(); ++t) {
    if (vocab[t] != world.separator && vocab[t] != world.eos) content.push_back(t);
  }
  const std::size_t window = std::max<std::size_t>(1, opt.window);
  std::vector<Tokens> refs(doc.sentences.size());
  for (std::size_t i = 0; i < doc.sentences.size(); ++i) {
    const std::size_t first = i + 1 >= window ? i + 1 - window : 0;
    const Tokens src = join_sources(doc, first, i, world.separator);
    const Tokens ctx = context_from(refs, first, i, world.separator);
    Tokens& ref = refs[i];
    for (std::size_t p = 0; p < doc.sentences[i].src.size(); ++p) {
      const std::size_t intended = model.intended(src, ctx, ref).front();
      std::size_t pick = intended;
      if (!rng.chance(1.0 - world.epsilon)) {
        do {
          pick = content[rng.below(content.size())];
        } while (pick == intended);
      }
      ref.push_back(vocab[pick]);
    }
    doc.sentences[i].ref = ref;
  }
}

}  // namespace

Corpus generate_synthetic_corpus(const WorldSpec& world, std::uint64_t seed,
                                 const SyntheticCorpusOptions& options) {
  world.validate();
  if (options.sent_len == 0) throw Error("sent_len must be at least 1");
  if (options.sents_per_doc == 0) throw Error("sents_per_doc must be at least 1");
  Vocabulary vocab;
  for (const auto& [src, tgt] : world.lexicon) {
    if (world.noun_genders.contains(src)) {
      vocab.nouns.push_back(src);
    } else if (src != world.formality_marker) {
      vocab.fillers.push_back(src);
    }
  }
  if (vocab.nouns.empty() || vocab.fillers.size() < options.sent_len) {
    throw Error("lexicon too small: need at least one noun and " +
                std::to_string(options.sent_len) + " filler words for sent_len " +
                std::to_string(options.sent_len));
  }

  const SyntheticModel model(world);
  Rng rng(seed);
  Corpus corpus;
  corpus.reserve(options.n_docs);
  for (std::size_t d = 0; d < options.n_docs; ++d) {
    Document doc;
    char id[32];
    std::snprintf(id, sizeof id, "doc-%04zu", d);
    doc.doc_id = id;
    doc.sentences = generate_sources(world, vocab, options, rng);
    sample_references(model, options, doc, rng);
    corpus.push_back(std::move(doc));
  }
  return corpus;
}

}  // namespace docdec
