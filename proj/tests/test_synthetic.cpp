#include <doctest.h>

#include <cmath>

#include "docdec/strategies.hpp"
#include "docdec/synthetic.hpp"

using namespace docdec;

namespace {

// Independent of the generator: walks the source text the way a reader would.
void check_antecedents(const WorldSpec& w, const Corpus& corpus, std::size_t window) {
  for (const Document& d : corpus) {
    bool any_pronoun = false;
    for (std::size_t i = 0; i < d.sentences.size(); ++i) {
      const Sentence& s = d.sentences[i];
      for (const Annotation& a : *s.annotations) {
        if (!is_gender(a.cls)) continue;
        any_pronoun = true;
        REQUIRE(s.src[a.pos] == w.pronoun_src);
        for (std::size_t p = 0; p < a.pos; ++p) CHECK(!w.noun_genders.contains(s.src[p]));
        std::optional<Gender> found;
        std::size_t distance = 0;
        for (std::size_t back = 1; back <= i && !found; ++back) {
          const Tokens& prev = d.sentences[i - back].src;
          for (std::size_t p = prev.size(); p-- > 0;) {
            if (auto g = w.noun_genders.find(prev[p]); g != w.noun_genders.end()) {
              found = g->second;
              distance = back;
              break;
            }
          }
        }
        REQUIRE(found);
        CHECK(distance >= 1);
        CHECK(distance <= window - 1);
        CHECK(gender_annotation(*found) == a.cls);
      }
    }
    if (d.sentences.size() >= 2) CHECK(any_pronoun);
  }
}

}  // namespace

TEST_CASE("generation is deterministic in the seed") {
  const WorldSpec w = default_world();
  SyntheticCorpusOptions o;
  o.n_docs = 5;
  CHECK(generate_synthetic_corpus(w, 42, o) == generate_synthetic_corpus(w, 42, o));
  CHECK(generate_synthetic_corpus(w, 42, o) != generate_synthetic_corpus(w, 43, o));
  CHECK(corpus_to_jsonl(generate_synthetic_corpus(w, 42, o)) ==
        corpus_to_jsonl(generate_synthetic_corpus(w, 42, o)));
}

TEST_CASE("generated corpus shape") {
  const WorldSpec w = default_world();
  SyntheticCorpusOptions o;
  o.n_docs = 20;
  o.sents_per_doc = 5;
  o.sent_len = 7;
  const Corpus c = generate_synthetic_corpus(w, 9, o);
  REQUIRE(c.size() == 20);
  CHECK_NOTHROW(validate_corpus(c));
  CHECK(c[3].doc_id == "doc-0003");
  for (const Document& d : c) {
    CHECK(d.sentences.size() == 5);
    CHECK(d.has_references());
    for (const Sentence& s : d.sentences) {
      CHECK(s.src.size() == 7);
      CHECK(s.ref->size() == 7);
      for (const Token& t : s.src) CHECK((w.lexicon.contains(t) || t == "it" || t == "you"));
    }
  }
  o.n_docs = 0;
  CHECK(generate_synthetic_corpus(w, 9, o).empty());
}

TEST_CASE("every annotated pronoun has its antecedent inside the window") {
  const WorldSpec w = default_world();
  SyntheticCorpusOptions o;
  o.n_docs = 1;
  check_antecedents(w, generate_synthetic_corpus(w, 1, o), o.window);
  o.n_docs = 200;
  for (std::size_t window : {2, 3, 4}) {
    o.window = window;
    check_antecedents(w, generate_synthetic_corpus(w, 17, o), window);
  }
}

TEST_CASE("formal register is always marked inside the window") {
  const WorldSpec w = default_world();
  SyntheticCorpusOptions o;
  o.n_docs = 200;
  o.you_rate = 0.5;
  const Corpus c = generate_synthetic_corpus(w, 4, o);
  std::size_t formal = 0, informal = 0;
  for (const Document& d : c) {
    for (std::size_t i = 0; i < d.sentences.size(); ++i) {
      for (const Annotation& a : *d.sentences[i].annotations) {
        if (is_gender(a.cls)) continue;
        CHECK(d.sentences[i].src[a.pos] == w.formality_src);
        bool marker = false;
        for (std::size_t j = i + 1 >= o.window ? i + 1 - o.window : 0; j <= i; ++j) {
          for (const Token& t : d.sentences[j].src) marker |= t == w.formality_marker;
        }
        if (a.cls == AnnotationClass::kFormal) {
          ++formal;
          CHECK(marker);
        } else {
          ++informal;
          CHECK(!marker);
        }
      }
    }
  }
  CHECK(formal > 0);
  CHECK(informal > 0);
}

TEST_CASE("noise-free references are the argmax translations") {
  WorldSpec w = default_world();
  w.epsilon = 0.0;
  SyntheticCorpusOptions o;
  o.n_docs = 30;
  const Corpus c = generate_synthetic_corpus(w, 8, o);
  const SyntheticModel m(w);
  DecodeOptions opts;
  opts.beam.beam_size = 1;
  for (const Document& d : c) {
    const DecodeResult r = decode_document(StrategyId::kCheating, m, d, opts);
    for (std::size_t i = 0; i < d.sentences.size(); ++i) {
      const Sentence& s = d.sentences[i];
      CHECK(r.per_sentence[i].tokens == *s.ref);
      for (const Annotation& a : *s.annotations) {
        const Token& t = (*s.ref)[a.pos];
        if (is_gender(a.cls)) {
          CHECK(t == w.pronoun_token(gender_of(a.cls)));
        } else {
          CHECK(t == w.formality_token(a.cls == AnnotationClass::kFormal ? Formality::kFormal
                                                                         : Formality::kInformal));
        }
      }
    }
  }
}

TEST_CASE("sampled references never beat the argmax translation") {
  const WorldSpec w = default_world();
  SyntheticCorpusOptions o;
  o.n_docs = 300;
  o.sent_len = 5;
  const Corpus c = generate_synthetic_corpus(w, 21, o);
  const SyntheticModel m(w);
  DecodeOptions opts;
  opts.beam.beam_size = 4;
  std::size_t strictly = 0, total = 0;
  for (const Document& d : c) {
    const DecodeResult r = decode_document(StrategyId::kCheating, m, d, opts);
    for (std::size_t i = 0; i < d.sentences.size(); ++i) {
      const std::size_t first = i + 1 >= opts.window ? i + 1 - opts.window : 0;
      std::vector<Tokens> refs;
      for (const Sentence& s : d.sentences) refs.push_back(*s.ref);
      const Tokens src = join_sources(d, first, i, w.separator);
      const Tokens ctx = context_from(refs, first, i, w.separator);
      Tokens ref = refs[i];
      ref.push_back(w.eos);
      Tokens best = r.per_sentence[i].tokens;
      best.push_back(w.eos);
      const double ref_score = score_sequence(m, src, ctx, ref).total_logprob;
      const double best_score = score_sequence(m, src, ctx, best).total_logprob;
      CHECK(ref_score <= best_score + 1e-12);
      strictly += ref_score < best_score - 1e-12;
      ++total;
    }
  }
  // A reference differs from the argmax with probability 1-(1-eps)^L; tied
  // pronoun/formality slots can absorb a little of that mass.
  const double expected = 1.0 - std::pow(1.0 - w.epsilon, 5.0);
  const double observed = static_cast<double>(strictly) / static_cast<double>(total);
  const double sd = std::sqrt(expected * (1 - expected) / static_cast<double>(total));
  CHECK(observed <= expected + 4 * sd);
  CHECK(observed >= expected - 4 * sd - 0.02);
}

TEST_CASE("lexicon too small") {
  WorldSpec w;
  w.lexicon = {{"moon", "mond"}, {"sees", "sieht"}, {"sir", "herr"}};
  w.noun_genders = {{"moon", Gender::kMale}};
  SyntheticCorpusOptions o;
  o.n_docs = 1;
  o.sent_len = 2;
  CHECK_THROWS_AS(generate_synthetic_corpus(w, 1, o), Error);
  o.sent_len = 1;
  CHECK_NOTHROW(generate_synthetic_corpus(w, 1, o));
  o.sent_len = 0;
  CHECK_THROWS_AS(generate_synthetic_corpus(w, 1, o), Error);
}
