#include <doctest.h>

#include <random>

#include "docdec/strategies.hpp"
#include "docdec/synthetic.hpp"
#include "support/scorers.hpp"

using namespace docdec;
using docdec::testing::HashedScorer;

namespace {

Corpus corpus_of(std::size_t docs, std::size_t sents, std::size_t len, std::size_t window,
                 std::uint64_t seed, double eps = 0.05) {
  WorldSpec w = default_world();
  w.epsilon = eps;
  SyntheticCorpusOptions o;
  o.n_docs = docs;
  o.sents_per_doc = sents;
  o.sent_len = len;
  o.window = window;
  return generate_synthetic_corpus(w, seed, o);
}

void same_output(const DecodeResult& a, const DecodeResult& b) {
  CHECK(a.per_sentence == b.per_sentence);
  CHECK(a.diagnostics == b.diagnostics);
}

}  // namespace

TEST_CASE("split_by_separator") {
  const Token sep = "<sep>", eos = "</s>";
  SUBCASE("exact") {
    const Tokens t{"a", sep, "b", eos};
    const SplitResult r = split_by_separator(t, 2, sep, eos);
    CHECK(r.parts == std::vector<Tokens>{{"a"}, {"b"}});
    CHECK(!r.diagnostic);
  }
  SUBCASE("deficit pads") {
    const Tokens t{"a", eos};
    const SplitResult r = split_by_separator(t, 2, sep, eos);
    CHECK(r.parts == std::vector<Tokens>{{"a"}, {}});
    CHECK(r.diagnostic == DiagnosticKind::kSeparatorDeficit);
  }
  SUBCASE("surplus merges") {
    const Tokens t{"a", sep, "b", sep, "c", eos};
    const SplitResult r = split_by_separator(t, 2, sep, eos);
    CHECK(r.parts == std::vector<Tokens>{{"a"}, {"b", sep, "c"}});
    CHECK(r.diagnostic == DiagnosticKind::kSeparatorSurplus);
  }
  SUBCASE("single part keeps inner separators") {
    const Tokens t{sep, eos};
    const SplitResult r = split_by_separator(t, 1, sep, eos);
    CHECK(r.parts == std::vector<Tokens>{{sep}});
    CHECK(r.diagnostic == DiagnosticKind::kSeparatorSurplus);
  }
  SUBCASE("only eos") {
    const Tokens t{eos};
    const SplitResult r = split_by_separator(t, 3, sep, eos);
    CHECK(r.parts == std::vector<Tokens>{{}, {}, {}});
    CHECK(r.diagnostic == DiagnosticKind::kSeparatorDeficit);
  }
  const Tokens t{"a", eos};
  CHECK_THROWS_AS(split_by_separator(t, 0, sep, eos), Error);
}

TEST_CASE("strategy names") {
  CHECK(all_strategies().size() == 9);
  for (StrategyId s : all_strategies()) CHECK(parse_strategy(to_string(s)) == s);
  CHECK(to_string(StrategyId::kDocTransBeam) == "doc-trans-beam");
  CHECK_THROWS_AS(parse_strategy("greedy"), Error);
}

TEST_CASE("sentence-level cost hand count") {
  CHECK(predicted_cost(StrategyId::kSentenceLevel, 6, 5, 3, 12, 1) == 36);
  CHECK(predicted_cost(StrategyId::kDocTransBeam, 6, 5, 3, 12, 4) ==
        12 * predicted_cost(StrategyId::kDocTrans, 6, 5, 3, 12, 4));
  const Corpus c = corpus_of(1, 6, 5, 3, 2);
  const SyntheticModel m(default_world());
  DecodeOptions o;
  o.beam.beam_size = 1;
  CHECK(decode_document(StrategyId::kSentenceLevel, m, c[0], o).forward_passes == 36);
}

TEST_CASE("measured cost equals the closed form") {
  const SyntheticModel m(default_world());
  std::mt19937 rng(99);
  for (int trial = 0; trial < 60; ++trial) {
    const std::size_t n = 1 + rng() % 10, len = 1 + rng() % 8, w = 1 + rng() % 4;
    DecodeOptions o;
    o.window = w;
    o.context_beam = 1 + rng() % 4;
    o.beam.beam_size = 1 + rng() % 3;
    const Corpus c = corpus_of(1, n, len, w, rng());
    for (StrategyId s : all_strategies()) {
      CAPTURE(to_string(s));
      CAPTURE(n);
      CAPTURE(len);
      CAPTURE(w);
      CHECK(decode_document(s, m, c[0], o).forward_passes ==
            predicted_cost(s, n, len, w, o.context_beam, o.beam.beam_size));
    }
  }
}

TEST_CASE("cost ordering on uniform documents") {
  for (std::size_t n : {4, 6, 10}) {
    for (std::size_t w : {3, 4}) {
      const std::size_t h = w + 1, b = 3, len = 6;
      auto cost = [&](StrategyId s) { return predicted_cost(s, n, len, w, h, b); };
      CHECK(cost(StrategyId::kSentenceLevel) == cost(StrategyId::kNoContext));
      CHECK(cost(StrategyId::kNoContext) <= cost(StrategyId::kDocTrans));
      CHECK(cost(StrategyId::kDocTrans) < cost(StrategyId::kTwoPass));
      CHECK(cost(StrategyId::kTwoPass) < cost(StrategyId::kLastSentence));
      CHECK(cost(StrategyId::kLastSentence) < cost(StrategyId::kDocTransBeam));
    }
  }
}

TEST_CASE("window of one collapses every strategy to sentence-level") {
  const SyntheticModel m(default_world());
  DecodeOptions o;
  o.window = 1;
  o.beam.beam_size = 4;
  o.context_beam = 3;
  for (const Document& d : corpus_of(10, 5, 6, 3, 5)) {
    const DecodeResult base = decode_document(StrategyId::kSentenceLevel, m, d, o);
    for (StrategyId s : all_strategies()) {
      CAPTURE(to_string(s));
      same_output(decode_document(s, m, d, o), base);
    }
  }
}

TEST_CASE("context beam of one is doc-trans") {
  DecodeOptions o;
  o.context_beam = 1;
  o.beam.beam_size = 3;
  const SyntheticModel m(default_world());
  for (const Document& d : corpus_of(10, 6, 5, 3, 6)) {
    same_output(decode_document(StrategyId::kDocTransBeam, m, d, o),
                decode_document(StrategyId::kDocTrans, m, d, o));
  }
  // Holds for any scorer, separators or not.
  const HashedScorer scorer({"a", "b", "<sep>", "</s>"}, 4);
  Document d;
  d.doc_id = "r";
  d.sentences = {{{"x", "y"}, {}, {}}, {{"z"}, {}, {}}, {{"x"}, {}, {}}};
  for (std::size_t w : {2, 3}) {
    o.window = w;
    same_output(decode_document(StrategyId::kDocTransBeam, scorer, d, o),
                decode_document(StrategyId::kDocTrans, scorer, d, o));
  }
}

TEST_CASE("single-sentence documents collapse every strategy") {
  const SyntheticModel m(default_world());
  DecodeOptions o;
  o.beam.beam_size = 3;
  o.context_beam = 4;
  for (const Document& d : corpus_of(10, 1, 7, 3, 8)) {
    const DecodeResult base = decode_document(StrategyId::kSentenceLevel, m, d, o);
    for (StrategyId s : all_strategies()) same_output(decode_document(s, m, d, o), base);
  }
  // Raw stream ranking agrees with the final ranking when length_norm is off.
  const HashedScorer scorer({"a", "b", "<sep>", "</s>"}, 12);
  Document d;
  d.doc_id = "r";
  d.sentences = {{{"x", "y", "z"}, Tokens{"a"}, {}}};
  o.beam.length_norm = false;
  const DecodeResult base = decode_document(StrategyId::kSentenceLevel, scorer, d, o);
  for (StrategyId s : all_strategies()) same_output(decode_document(s, scorer, d, o), base);
}

TEST_CASE("every strategy yields one hypothesis per sentence") {
  const SyntheticModel m(default_world());
  DecodeOptions o;
  o.beam.beam_size = 2;
  o.context_beam = 2;
  for (const Document& d : corpus_of(5, 7, 4, 3, 10)) {
    for (StrategyId s : all_strategies()) {
      const DecodeResult r = decode_document(s, m, d, o);
      REQUIRE(r.per_sentence.size() == d.sentences.size());
      CHECK(r.forward_passes > 0);
      CHECK(r.diagnostics.empty());
      for (std::size_t i = 0; i < d.sentences.size(); ++i) {
        CHECK(r.per_sentence[i].tokens.size() == d.sentences[i].src.size());
      }
    }
  }
}

TEST_CASE("cheating resolves every pronoun from the reference context") {
  const WorldSpec w = default_world();
  const SyntheticModel m(w);
  std::map<Token, Gender> translation_gender;
  for (const auto& [src, g] : w.noun_genders) translation_gender[w.lexicon.at(src)] = g;
  DecodeOptions o;
  std::size_t pronouns = 0, agree_with_annotation = 0;
  for (const Document& d : corpus_of(100, 6, 8, 3, 12)) {
    const DecodeResult r = decode_document(StrategyId::kCheating, m, d, o);
    for (std::size_t i = 0; i < d.sentences.size(); ++i) {
      for (const Annotation& a : *d.sentences[i].annotations) {
        if (!is_gender(a.cls)) continue;
        // Scan the gold target text backwards from the pronoun for a noun.
        Tokens visible;
        for (std::size_t j = i + 1 >= o.window ? i + 1 - o.window : 0; j < i; ++j) {
          visible.insert(visible.end(), d.sentences[j].ref->begin(), d.sentences[j].ref->end());
        }
        const Tokens& own = r.per_sentence[i].tokens;
        visible.insert(visible.end(), own.begin(), own.begin() + static_cast<std::ptrdiff_t>(a.pos));
        Gender g = Gender::kMale;  // no antecedent: the vocabulary tie-break
        for (std::size_t k = visible.size(); k-- > 0;) {
          if (auto it = translation_gender.find(visible[k]); it != translation_gender.end()) {
            g = it->second;
            break;
          }
        }
        CHECK(own[a.pos] == w.pronoun_token(g));
        ++pronouns;
        agree_with_annotation += own[a.pos] == w.pronoun_token(gender_of(a.cls));
      }
    }
  }
  REQUIRE(pronouns > 50);
  CHECK(static_cast<double>(agree_with_annotation) / static_cast<double>(pronouns) > 0.9);
}

TEST_CASE("doc-trans-beam never scores below doc-trans") {
  const SyntheticModel m(default_world());
  DecodeOptions o;
  o.beam.beam_size = 3;
  o.context_beam = 3;
  for (const Document& d : corpus_of(30, 6, 6, 3, 13)) {
    CHECK(decode_document(StrategyId::kDocTransBeam, m, d, o).score >=
          decode_document(StrategyId::kDocTrans, m, d, o).score - 1e-9);
  }
}

TEST_CASE("decoding is deterministic and independent of worker count") {
  const SyntheticModel m(default_world());
  const Corpus c = corpus_of(12, 5, 6, 3, 14);
  DecodeOptions o;
  o.beam.beam_size = 3;
  o.context_beam = 2;
  for (StrategyId s : all_strategies()) {
    const auto serial = decode_corpus(s, m, c, o, 1);
    CHECK(serial == decode_corpus(s, m, c, o, 4));
    CHECK(serial == decode_corpus(s, m, c, o, 0));
  }
}

TEST_CASE("precondition failures") {
  const SyntheticModel m(default_world());
  Corpus c = corpus_of(1, 3, 4, 3, 15);
  for (Sentence& s : c[0].sentences) s.ref.reset();
  DecodeOptions o;
  try {
    decode_document(StrategyId::kCheating, m, c[0], o);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(std::string(e.what()).find("cheating") != std::string::npos);
  }
  o.window = 0;
  CHECK_THROWS_AS(decode_document(StrategyId::kDocTrans, m, c[0], o), Error);
  o.window = 3;
  o.context_beam = 0;
  CHECK_THROWS_AS(decode_document(StrategyId::kDocTransBeam, m, c[0], o), Error);
}

TEST_CASE("separator mismatches are repaired and reported") {
  // Under a scorer that never emits separators, a window of three sentences
  // comes back as one part plus two padded ones.
  const HashedScorer scorer({"a", "b", "</s>"}, 1);
  Document d;
  d.doc_id = "r";
  d.sentences = {{{"x"}, {}, {}}, {{"y"}, {}, {}}, {{"z"}, {}, {}}};
  DecodeOptions o;
  o.beam.beam_size = 2;
  const DecodeResult r = decode_document(StrategyId::kFullSegment, scorer, d, o);
  REQUIRE(r.diagnostics.size() == 1);
  CHECK(r.diagnostics[0].kind == DiagnosticKind::kSeparatorDeficit);
  CHECK(r.per_sentence[1].tokens.empty());
  CHECK(r.per_sentence[2].tokens.empty());
}
